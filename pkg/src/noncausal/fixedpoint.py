"""Fixed-point view of deterministic processes.

A deterministic process is a function e from joint party outputs to joint
environment inputs.  Closing the loop with local operations f_p turns
consistency questions into counting: the loop supports exactly the
assignments t with t = e(f(t)), and a deterministic process is logically
consistent precisely when that count is 1 for every choice of ops.  Mixtures
are consistent exactly when the weighted average count stays at 1 for every
choice of ops, which holds for one decomposition iff it holds for all.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .exact import (
    ZERO,
    ONE,
    DeterministicOp,
    check_cap,
    enumerate_deterministic_ops,
    flatten_index,
    format_rational,
    product,
    rat,
)
from .process import (
    ClassicalProcess,
    FileFormatError,
    Outcome,
    PartySpec,
)


class NonDeterministicProcessError(ValueError):
    """as_function was asked to read a process with fractional weights."""


@dataclass(frozen=True)
class ProcessFunction:
    """Total map from joint party outputs to joint environment inputs."""

    out_sizes: tuple[int, ...]  # domain alphabets, one per party
    in_sizes: tuple[int, ...]  # codomain alphabets
    table: tuple[Outcome, ...]  # indexed by the flattened domain tuple

    def __post_init__(self):
        if len(self.out_sizes) != len(self.in_sizes):
            raise ValueError("party counts differ between the two sides")
        if len(self.table) != product(self.out_sizes):
            raise ValueError("table does not cover the domain")
        for image in self.table:
            if len(image) != len(self.in_sizes) or any(
                not 0 <= v < s for v, s in zip(image, self.in_sizes)
            ):
                raise ValueError(f"image {image} out of range")

    def __call__(self, outs: Outcome) -> Outcome:
        return self.table[flatten_index(outs, self.out_sizes)]

    @staticmethod
    def from_callable(
        out_sizes: Sequence[int],
        in_sizes: Sequence[int],
        fn: Callable[[Outcome], Outcome],
    ) -> ProcessFunction:
        out_sizes = tuple(out_sizes)
        table = tuple(
            tuple(fn(o))
            for o in itertools.product(*(range(s) for s in out_sizes))
        )
        return ProcessFunction(out_sizes, tuple(in_sizes), table)


def as_function(e: ClassicalProcess) -> ProcessFunction:
    """Read a 0/1 process as a function; reject anything stochastic."""
    outs = e.env_out_sizes
    ins = e.env_in_sizes
    images: dict[Outcome, Outcome] = {}
    for (i, o), w in e.entries.items():
        if w != 1:
            raise NonDeterministicProcessError(
                f"entry {i}|{o} has weight {format_rational(w)}"
            )
        if o in images:
            raise NonDeterministicProcessError(f"two entries share column {o}")
        images[o] = i
    table = []
    for o in itertools.product(*(range(s) for s in outs)):
        if o not in images:
            raise NonDeterministicProcessError(f"column {o} has no entry")
        table.append(images[o])
    return ProcessFunction(outs, ins, tuple(table))


def function_process(
    fn: ProcessFunction, names: Sequence[str] | None = None
) -> ClassicalProcess:
    """Inverse of as_function."""
    if names is None:
        names = [f"P{k}" for k in range(len(fn.out_sizes))]
    parties = tuple(
        PartySpec(n, i, o) for n, i, o in zip(names, fn.in_sizes, fn.out_sizes)
    )
    return ClassicalProcess.from_function(parties, fn)


def fixed_points(
    fn: ProcessFunction, ops: Sequence[DeterministicOp]
) -> tuple[Outcome, ...]:
    """All t with t = fn(ops(t)), ops applied party-wise."""
    if len(ops) != len(fn.out_sizes):
        raise ValueError("one op per party required")
    for op, i_s, o_s in zip(ops, fn.in_sizes, fn.out_sizes):
        if op.in_size != i_s or op.out_size != o_s:
            raise ValueError("op alphabets do not match the process wires")
    found = []
    for t in itertools.product(*(range(s) for s in fn.in_sizes)):
        if fn(tuple(op(v) for op, v in zip(ops, t))) == t:
            found.append(t)
    return tuple(found)


def compose_with_ops(
    fn: ProcessFunction, ops: Sequence[DeterministicOp]
) -> tuple[tuple[Outcome, Outcome], ...]:
    """Truth table of t -> fn(ops(t)); its diagonal is the fixed-point set."""
    rows = []
    for t in itertools.product(*(range(s) for s in fn.in_sizes)):
        rows.append((t, fn(tuple(op(v) for op, v in zip(ops, t)))))
    return tuple(rows)


def _op_tuples(
    in_sizes: Sequence[int], out_sizes: Sequence[int], cap: int | None
):
    count = 1
    for i_s, o_s in zip(in_sizes, out_sizes):
        count *= o_s**i_s
    check_cap(count, cap)
    per_party = [
        enumerate_deterministic_ops(i_s, o_s, cap=cap)
        for i_s, o_s in zip(in_sizes, out_sizes)
    ]
    return itertools.product(*per_party)


@dataclass(frozen=True)
class ExtremalityResult:
    ok: bool
    ops: tuple[DeterministicOp, ...] | None = None
    points: tuple[Outcome, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_deterministic_extremal(
    fn: ProcessFunction, cap: int | None = None
) -> ExtremalityResult:
    """Exactly one fixed point under every choice of local ops.

    This singles out the deterministic processes that are logically
    consistent; they are the extreme points among deterministic candidates.
    Returns the first violating op tuple in canonical order otherwise.
    """
    for ops in _op_tuples(fn.in_sizes, fn.out_sizes, cap):
        pts = fixed_points(fn, ops)
        if len(pts) != 1:
            return ExtremalityResult(False, ops, pts)
    return ExtremalityResult(True)


# ---------------------------------------------------------------------------
# decompositions of stochastic processes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeterministicDecomposition:
    """Convex combination of deterministic processes over shared alphabets."""

    components: tuple[tuple[Fraction, ProcessFunction], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("empty decomposition")
        shapes = {
            (fn.out_sizes, fn.in_sizes) for _, fn in self.components
        }
        if len(shapes) > 1:
            raise ValueError("components disagree on alphabets")
        if any(w <= 0 for w, _ in self.components):
            raise ValueError("weights must be positive")
        if sum(w for w, _ in self.components) != 1:
            raise ValueError("weights must sum to 1")

    @property
    def out_sizes(self) -> tuple[int, ...]:
        return self.components[0][1].out_sizes

    @property
    def in_sizes(self) -> tuple[int, ...]:
        return self.components[0][1].in_sizes

    def mixture(self, names: Sequence[str] | None = None) -> ClassicalProcess:
        return ClassicalProcess.mix(
            [(w, function_process(fn, names)) for w, fn in self.components]
        )


def average_fixed_points(
    d: DeterministicDecomposition, ops: Sequence[DeterministicOp]
) -> Fraction:
    return sum(
        (w * len(fixed_points(fn, ops)) for w, fn in d.components), ZERO
    )


@dataclass(frozen=True)
class AverageCheckResult:
    ok: bool
    ops: tuple[DeterministicOp, ...] | None = None
    average: Fraction | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_unit_fixed_point_average(
    d: DeterministicDecomposition, cap: int | None = None
) -> AverageCheckResult:
    """Weighted fixed-point count equals 1 for every op tuple.

    The weighted count equals the loop weight of the mixed table under the
    same ops (map t -> ops(t) turns in-side loop solutions into out-side
    ones, bijectively), so this holds iff the mixture is logically
    consistent, no matter which decomposition of it was supplied.
    """
    for ops in _op_tuples(d.in_sizes, d.out_sizes, cap):
        avg = average_fixed_points(d, ops)
        if avg != 1:
            return AverageCheckResult(False, ops, avg)
    return AverageCheckResult(True)


def greedy_decomposition(e: ClassicalProcess) -> DeterministicDecomposition:
    """Peel deterministic components by repeatedly taking, in every column,
    the smallest remaining entry.  Always exact for column-stochastic tables;
    the result is just one decomposition among many, though any of them
    passes the unit-average check iff the table itself is consistent.
    """
    ins = e.env_in_sizes
    outs = e.env_out_sizes
    columns: dict[Outcome, dict[Outcome, Fraction]] = {}
    for o in itertools.product(*(range(s) for s in outs)):
        columns[o] = {}
    for (i, o), w in e.entries.items():
        if w < 0:
            raise ValueError("negative entry; not a stochastic table")
        columns[o][i] = w
    sums = {o: sum(col.values(), ZERO) for o, col in columns.items()}
    if any(s != 1 for s in sums.values()):
        raise ValueError("columns do not sum to 1; not a stochastic table")

    components: list[tuple[Fraction, ProcessFunction]] = []
    remaining = ONE
    while remaining > 0:
        picks: dict[Outcome, Outcome] = {}
        weight = remaining
        for o, col in columns.items():
            i = min(col, key=lambda k: (col[k], k))
            picks[o] = i
            weight = min(weight, col[i])
        table = tuple(
            picks[o] for o in itertools.product(*(range(s) for s in outs))
        )
        components.append((weight, ProcessFunction(outs, ins, table)))
        for o in columns:
            col = columns[o]
            col[picks[o]] -= weight
            if col[picks[o]] == 0:
                del col[picks[o]]
        remaining -= weight
    return DeterministicDecomposition(tuple(components))


# ---------------------------------------------------------------------------
# presets and files
# ---------------------------------------------------------------------------


def preset_decomposition(name: str) -> DeterministicDecomposition:
    if name == "circular-mixture":
        half = Fraction(1, 2)
        cyc = ProcessFunction.from_callable(
            (2, 2, 2), (2, 2, 2), lambda o: (o[-1],) + o[:-1]
        )
        flip = ProcessFunction.from_callable(
            (2, 2, 2), (2, 2, 2), lambda o: tuple(v ^ 1 for v in (o[-1],) + o[:-1])
        )
        return DeterministicDecomposition(((half, cyc), (half, flip)))
    raise KeyError(f"unknown decomposition preset {name!r}")


def parse_decomposition(
    text: str, resolve: Callable[[str], ProcessFunction] | None = None
) -> DeterministicDecomposition:
    """Decomposition file: party headers, then components.

        party R 2 2
        component 1/2
        0 0 0 | 0 0 0         # e(outs) = ins, one line per column
        ...
        component 1/2 ref:NAME

    ref components are looked up through the resolve callback.
    """
    names: list[str] = []
    ins: list[int] = []
    outs: list[int] = []
    components: list[tuple[Fraction, ProcessFunction | None, dict, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "party":
            if components:
                raise FileFormatError(f"line {lineno}: party after components")
            if len(parts) != 4:
                raise FileFormatError(f"line {lineno}: expected 'party NAME IN OUT'")
            try:
                names.append(parts[1])
                ins.append(int(parts[2]))
                outs.append(int(parts[3]))
            except ValueError:
                raise FileFormatError(f"line {lineno}: bad alphabet size")
        elif parts[0] == "component":
            if not names:
                raise FileFormatError(f"line {lineno}: component before party lines")
            if len(parts) not in (2, 3):
                raise FileFormatError(
                    f"line {lineno}: expected 'component WEIGHT [ref:NAME]'"
                )
            try:
                w = rat(parts[1])
            except (ValueError, ZeroDivisionError):
                raise FileFormatError(f"line {lineno}: bad weight {parts[1]!r}")
            fn = None
            if len(parts) == 3:
                if not parts[2].startswith("ref:") or resolve is None:
                    raise FileFormatError(
                        f"line {lineno}: unresolvable reference {parts[2]!r}"
                    )
                fn = resolve(parts[2][4:])
            components.append((w, fn, {}, lineno))
        elif "|" in line:
            if not components:
                raise FileFormatError(f"line {lineno}: table row before any component")
            w, fn, rows, at = components[-1]
            if fn is not None:
                raise FileFormatError(
                    f"line {lineno}: table row inside a referenced component"
                )
            left, right = line.split("|", 1)
            try:
                i = tuple(int(v) for v in left.split())
                o = tuple(int(v) for v in right.split())
            except ValueError:
                raise FileFormatError(f"line {lineno}: values must be integers")
            if len(i) != len(names) or len(o) != len(names):
                raise FileFormatError(f"line {lineno}: arity mismatch")
            if o in rows:
                raise FileFormatError(f"line {lineno}: duplicate column {o}")
            rows[o] = i
        else:
            raise FileFormatError(f"line {lineno}: unrecognized line")
    if not components:
        raise FileFormatError("line 1: no components found")

    built: list[tuple[Fraction, ProcessFunction]] = []
    for w, fn, rows, at in components:
        if fn is None:
            try:
                fn = ProcessFunction(
                    tuple(outs),
                    tuple(ins),
                    tuple(
                        rows[o]
                        for o in itertools.product(*(range(s) for s in outs))
                    ),
                )
            except KeyError as missing:
                raise FileFormatError(
                    f"line {at}: component is missing column {missing.args[0]}"
                )
        if (fn.out_sizes, fn.in_sizes) != (tuple(outs), tuple(ins)):
            raise FileFormatError(f"line {at}: component alphabets do not match header")
        built.append((w, fn))
    try:
        return DeterministicDecomposition(tuple(built))
    except ValueError as err:
        raise FileFormatError(f"line 1: {err}")


def format_decomposition(
    d: DeterministicDecomposition, names: Sequence[str] | None = None
) -> str:
    if names is None:
        names = [f"P{k}" for k in range(len(d.out_sizes))]
    lines = [
        f"party {n} {i} {o}"
        for n, i, o in zip(names, d.in_sizes, d.out_sizes)
    ]
    for w, fn in d.components:
        lines.append(f"component {format_rational(w)}")
        for o in itertools.product(*(range(s) for s in d.out_sizes)):
            i = fn(o)
            lines.append(
                " ".join(str(v) for v in i) + " | " + " ".join(str(v) for v in o)
            )
    return "\n".join(lines) + "\n"
