"""Exact linear feasibility via phase-1 simplex over Fraction.

Small systems only (hundreds of variables).  Bland's rule guarantees
termination, exact pivots guarantee that a returned witness satisfies every
constraint with equality or slack as stated, and that infeasibility reports
are proofs rather than tolerance artifacts.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .exact import ZERO, ONE, rat

Var = Hashable


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[tuple[Var, Fraction], ...]
    rel: str  # "<=", ">=" or "=="
    rhs: Fraction

    def __post_init__(self):
        if self.rel not in ("<=", ">=", "=="):
            raise ValueError(f"bad relation {self.rel!r}")

    def evaluate(self, assignment: Mapping[Var, Fraction]) -> Fraction:
        return sum((c * assignment.get(v, ZERO) for v, c in self.coeffs), ZERO)

    def holds(self, assignment: Mapping[Var, Fraction]) -> bool:
        lhs = self.evaluate(assignment)
        if self.rel == "<=":
            return lhs <= self.rhs
        if self.rel == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


def _coeff_items(coeffs) -> tuple[tuple[Var, Fraction], ...]:
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    merged: dict[Var, Fraction] = {}
    for v, c in items:
        merged[v] = merged.get(v, ZERO) + rat(c)
    return tuple(merged.items())


def eq(coeffs, rhs) -> Constraint:
    return Constraint(_coeff_items(coeffs), "==", rat(rhs))


def le(coeffs, rhs) -> Constraint:
    return Constraint(_coeff_items(coeffs), "<=", rat(rhs))


def ge(coeffs, rhs) -> Constraint:
    return Constraint(_coeff_items(coeffs), ">=", rat(rhs))


def lp_feasible(
    constraints: Sequence[Constraint],
    nonneg: Iterable[Var] = (),
) -> dict[Var, Fraction] | None:
    """Exact witness for the system, or None if it is infeasible.

    Variables listed in `nonneg` are constrained to be >= 0; all others are
    free (internally split into a difference of two nonnegative parts).
    """
    nonneg = list(dict.fromkeys(nonneg))
    nonneg_set = set(nonneg)
    variables = list(nonneg)
    for con in constraints:
        for v, _ in con.coeffs:
            if v not in nonneg_set and v not in variables:
                variables.append(v)

    # Column layout: one column per nonnegative var, a (plus, minus) pair per
    # free var, then one slack per inequality.
    columns: list[tuple[Var, int]] = []  # (var, sign)
    col_of: dict[Var, list[int]] = {}
    for v in variables:
        col_of[v] = [len(columns)]
        columns.append((v, +1))
        if v not in nonneg_set:
            col_of[v].append(len(columns))
            columns.append((v, -1))

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for con in constraints:
        row = [ZERO] * len(columns)
        for v, c in con.coeffs:
            cols = col_of[v]
            row[cols[0]] += c
            if len(cols) == 2:
                row[cols[1]] -= c
        rows.append(row)
        rhs.append(con.rhs)

    for i, con in enumerate(constraints):
        if con.rel == "==":
            continue
        slack = ONE if con.rel == "<=" else -ONE
        for row in rows:
            row.append(ZERO)
        rows[i][len(columns)] = slack
        columns.append((("slack", i), +1))

    n = len(columns)
    m = len(rows)
    if m == 0:
        return {v: ZERO for v in variables}

    # Normalize to b >= 0 and append one artificial per row; the artificials
    # form the starting basis for phase 1.
    tableau: list[list[Fraction]] = []
    for i in range(m):
        row = list(rows[i])
        b = rhs[i]
        if b < 0:
            row = [-x for x in row]
            b = -b
        row.extend(ONE if j == i else ZERO for j in range(m))
        row.append(b)
        tableau.append(row)
    basis = [n + i for i in range(m)]
    total = n + m  # artificial columns occupy [n, total)

    # Reduced-cost row for minimizing the sum of artificials.
    cost = [ZERO] * (total + 1)
    for j in range(total + 1):
        s = sum(tableau[i][j] for i in range(m))
        cost[j] = (ONE if n <= j < total else ZERO) - s

    while True:
        enter = next((j for j in range(total) if cost[j] < 0), None)
        if enter is None:
            break
        pivot_row = None
        best = None
        for i in range(m):
            a = tableau[i][enter]
            if a > 0:
                ratio = tableau[i][total] / a
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[pivot_row]
                ):
                    best = ratio
                    pivot_row = i
        if pivot_row is None:
            raise RuntimeError("phase-1 objective unbounded; malformed tableau")
        _pivot(tableau, cost, basis, pivot_row, enter, total)

    objective = -cost[total]
    if objective != 0:
        return None

    values = [ZERO] * n
    for i, b in enumerate(basis):
        if b < n:
            values[b] = tableau[i][total]
    witness: dict[Var, Fraction] = {}
    for v in variables:
        cols = col_of[v]
        x = values[cols[0]]
        if len(cols) == 2:
            x -= values[cols[1]]
        witness[v] = x

    for con in constraints:  # exactness is part of the contract
        if not con.holds(witness):
            raise AssertionError("simplex produced an invalid witness")
    return witness


def _pivot(tableau, cost, basis, pr: int, pc: int, width: int) -> None:
    pivot = tableau[pr][pc]
    tableau[pr] = [x / pivot for x in tableau[pr]]
    for i in range(len(tableau)):
        if i != pr and tableau[i][pc] != 0:
            f = tableau[i][pc]
            tableau[i] = [x - f * y for x, y in zip(tableau[i], tableau[pr])]
    if cost[pc] != 0:
        f = cost[pc]
        for j in range(width + 1):
            cost[j] -= f * tableau[pr][j]
    basis[pr] = pc
