"""Exact rational linear algebra: stochastic vectors and matrices over Fraction.

Everything on the classical side of the toolkit runs through this module, so
no floating point is allowed here.  Index flattening of composite alphabets
puts the leftmost factor in the most significant position throughout.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

# Guard for exhaustive enumerations (deterministic ops, strategy spaces).
# Overridable per call and via the environment.
DEFAULT_CAP = 1_000_000


class EnumerationCapExceeded(RuntimeError):
    """Raised when an exhaustive sweep would exceed the configured cap."""


class PromiseViolationError(RuntimeError):
    """The input broke a promise the task presupposes, so no answer exists."""


def default_cap() -> int:
    raw = os.environ.get("NONCAUSAL_CAP")
    return int(raw) if raw else DEFAULT_CAP


def check_cap(count: int, cap: int | None) -> None:
    limit = default_cap() if cap is None else cap
    if count > limit:
        raise EnumerationCapExceeded(
            f"enumeration of {count} items exceeds cap {limit}"
        )


def rat(value: int | str | Fraction) -> Fraction:
    """Parse a rational: Fraction, int, or a string like '3/4' or '-2'."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value).strip())


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def flatten_index(values: Sequence[int], sizes: Sequence[int]) -> int:
    """Mixed-radix flattening, leftmost factor most significant."""
    if len(values) != len(sizes):
        raise ValueError("index tuple does not match sizes")
    k = 0
    for v, s in zip(values, sizes):
        if not 0 <= v < s:
            raise ValueError(f"index {v} out of range for size {s}")
        k = k * s + v
    return k


def unflatten_index(k: int, sizes: Sequence[int]) -> tuple[int, ...]:
    out = []
    for s in reversed(sizes):
        out.append(k % s)
        k //= s
    if k:
        raise ValueError("flat index out of range")
    return tuple(reversed(out))


def product(values: Iterable[int]) -> int:
    p = 1
    for v in values:
        p *= v
    return p


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Matrix:
    """Dense exact matrix.  Entry [r][c] conditions on the column index:
    stochastic maps store P(out=r | in=c), so valid ones are column-stochastic.
    """

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("matrix needs at least one row")
        width = len(self.entries[0])
        if any(len(row) != width for row in self.entries):
            raise ValueError("ragged matrix")

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def __getitem__(self, rc: tuple[int, int]) -> Fraction:
        r, c = rc
        return self.entries[r][c]

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int | str | Fraction]]) -> Matrix:
        return Matrix(tuple(tuple(rat(x) for x in row) for row in rows))

    @staticmethod
    def zeros(rows: int, cols: int) -> Matrix:
        return Matrix(tuple(tuple(ZERO for _ in range(cols)) for _ in range(rows)))

    @staticmethod
    def identity(n: int) -> Matrix:
        return Matrix(
            tuple(tuple(ONE if r == c else ZERO for c in range(n)) for r in range(n))
        )

    def column(self, c: int) -> tuple[Fraction, ...]:
        return tuple(row[c] for row in self.entries)

    def transpose(self) -> Matrix:
        return Matrix(tuple(zip(*self.entries)))

    def mul(self, other: Matrix) -> Matrix:
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        ot = other.transpose().entries
        return Matrix(
            tuple(
                tuple(sum(a * b for a, b in zip(row, col)) for col in ot)
                for row in self.entries
            )
        )

    def add(self, other: Matrix) -> Matrix:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("dimension mismatch in matrix sum")
        return Matrix(
            tuple(
                tuple(a + b for a, b in zip(r1, r2))
                for r1, r2 in zip(self.entries, other.entries)
            )
        )

    def scale(self, factor: int | str | Fraction) -> Matrix:
        f = rat(factor)
        return Matrix(tuple(tuple(f * x for x in row) for row in self.entries))

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("trace of a non-square matrix")
        return sum(self.entries[i][i] for i in range(self.rows))

    def is_nonnegative(self) -> bool:
        return all(x >= 0 for row in self.entries for x in row)

    def is_column_stochastic(self) -> bool:
        if not self.is_nonnegative():
            return False
        return all(sum(self.column(c)) == 1 for c in range(self.cols))


class StochasticMatrix(Matrix):
    """Matrix whose columns are probability distributions (checked)."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_column_stochastic():
            raise ValueError("matrix is not column-stochastic")


def trace_product(a: Matrix, b: Matrix) -> Fraction:
    """tr(a @ b) without materializing the product."""
    if a.cols != b.rows or a.rows != b.cols:
        raise ValueError("dimension mismatch in trace product")
    return sum(
        a.entries[r][c] * b.entries[c][r]
        for r in range(a.rows)
        for c in range(a.cols)
    )


def tensor(*mats: Matrix) -> Matrix:
    """Kronecker product; row ((i_a, i_b)) flattens with i_a most significant."""
    if not mats:
        raise ValueError("tensor of nothing")
    out = mats[0]
    for m in mats[1:]:
        out = _tensor2(out, m)
    if all(isinstance(m, StochasticMatrix) for m in mats):
        return StochasticMatrix(out.entries)
    return out


def _tensor2(a: Matrix, b: Matrix) -> Matrix:
    rows = []
    for ra in a.entries:
        for rb in b.entries:
            rows.append(tuple(x * y for x in ra for y in rb))
    return Matrix(tuple(rows))


# ---------------------------------------------------------------------------
# vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StochasticVector:
    """Probability distribution over a finite alphabet, exact."""

    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("empty distribution")
        if any(x < 0 for x in self.entries):
            raise ValueError("negative probability")
        if sum(self.entries) != 1:
            raise ValueError("distribution does not sum to 1")

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> Fraction:
        return self.entries[i]

    @staticmethod
    def of(values: Sequence[int | str | Fraction]) -> StochasticVector:
        return StochasticVector(tuple(rat(x) for x in values))

    @staticmethod
    def basis(size: int, index: int) -> StochasticVector:
        return StochasticVector(
            tuple(ONE if i == index else ZERO for i in range(size))
        )

    @staticmethod
    def uniform(size: int) -> StochasticVector:
        p = Fraction(1, size)
        return StochasticVector(tuple(p for _ in range(size)))


# ---------------------------------------------------------------------------
# deterministic operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeterministicOp:
    """Function between finite alphabets, as a lookup table."""

    table: tuple[int, ...]
    out_size: int

    def __post_init__(self):
        if not self.table:
            raise ValueError("empty table")
        if any(not 0 <= v < self.out_size for v in self.table):
            raise ValueError("table value out of range")

    @property
    def in_size(self) -> int:
        return len(self.table)

    def __call__(self, x: int) -> int:
        return self.table[x]

    def matrix(self) -> StochasticMatrix:
        return StochasticMatrix(
            tuple(
                tuple(ONE if self.table[c] == r else ZERO for c in range(self.in_size))
                for r in range(self.out_size)
            )
        )

    def name(self) -> str:
        for label, op in BIT_OPS.items():
            if op == self:
                return label
        return "map[" + ",".join(str(v) for v in self.table) + "]"


D_ID = DeterministicOp((0, 1), 2)
D_NOT = DeterministicOp((1, 0), 2)
D_CONST0 = DeterministicOp((0, 0), 2)
D_CONST1 = DeterministicOp((1, 1), 2)

BIT_OPS = {"id": D_ID, "not": D_NOT, "const0": D_CONST0, "const1": D_CONST1}


def enumerate_deterministic_ops(
    in_size: int, out_size: int, cap: int | None = None
) -> list[DeterministicOp]:
    """All out_size**in_size functions, ordered lexicographically by table."""
    check_cap(out_size**in_size, cap)
    return [
        DeterministicOp(table, out_size)
        for table in itertools.product(range(out_size), repeat=in_size)
    ]
