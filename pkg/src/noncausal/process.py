"""Classical processes without a fixed causal order.

A process assigns, to every tuple of values the parties return to their
environment, a distribution over the values the environment hands back.
Logical consistency means every choice of local operations yields a total
probability of exactly 1; nothing here assumes a global time ordering.

All probabilities are exact rationals.
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
    Matrix,
    StochasticMatrix,
    check_cap,
    enumerate_deterministic_ops,
    flatten_index,
    format_rational,
    product,
    rat,
    unflatten_index,
)
from . import lp


class InconsistentProcessError(RuntimeError):
    """An operation required logical consistency and the process lacks it."""


class FileFormatError(ValueError):
    """Malformed toolkit file; message carries the offending line number."""


@dataclass(frozen=True)
class PartySpec:
    """Alphabet sizes for one party.

    env_in / env_out are the wires between the party and the process;
    game_in / game_out are the party's interface to a referee.
    """

    name: str
    env_in: int
    env_out: int
    game_in: int = 2
    game_out: int = 2

    def __post_init__(self):
        for n in (self.env_in, self.env_out, self.game_in, self.game_out):
            if n < 1:
                raise ValueError("alphabet sizes must be positive")


Outcome = tuple[int, ...]


@dataclass
class ClassicalProcess:
    """Candidate process table, stored sparsely as {(ins, outs): weight}.

    `ins` is the tuple of environment inputs delivered to the parties and
    `outs` the tuple of party outputs being conditioned on.  Validity
    (nonnegativity, unit total probability under all local operations) is
    checked by the predicates below, not at construction, so that broken
    candidates can be represented and diagnosed.  Treat instances as
    immutable once built.
    """

    parties: tuple[PartySpec, ...]
    entries: dict[tuple[Outcome, Outcome], Fraction]

    def __post_init__(self):
        self.parties = tuple(self.parties)
        ins = self.env_in_sizes
        outs = self.env_out_sizes
        clean: dict[tuple[Outcome, Outcome], Fraction] = {}
        for (i, o), w in self.entries.items():
            if len(i) != len(ins) or len(o) != len(outs):
                raise ValueError("entry arity does not match party count")
            if any(not 0 <= v < s for v, s in zip(i, ins)):
                raise ValueError(f"environment input {i} out of range")
            if any(not 0 <= v < s for v, s in zip(o, outs)):
                raise ValueError(f"party output {o} out of range")
            w = rat(w)
            if w != 0:
                clean[(tuple(i), tuple(o))] = w
        self.entries = clean

    @property
    def env_in_sizes(self) -> tuple[int, ...]:
        return tuple(p.env_in for p in self.parties)

    @property
    def env_out_sizes(self) -> tuple[int, ...]:
        return tuple(p.env_out for p in self.parties)

    def probability(self, ins: Outcome, outs: Outcome) -> Fraction:
        return self.entries.get((tuple(ins), tuple(outs)), ZERO)

    def matrix(self) -> Matrix:
        """Dense table, rows = joint environment inputs, cols = joint outputs."""
        ins = self.env_in_sizes
        outs = self.env_out_sizes
        rows = [[ZERO] * product(outs) for _ in range(product(ins))]
        for (i, o), w in self.entries.items():
            rows[flatten_index(i, ins)][flatten_index(o, outs)] = w
        return Matrix(tuple(tuple(r) for r in rows))

    @staticmethod
    def from_function(
        parties: Sequence[PartySpec], fn: Callable[[Outcome], Outcome]
    ) -> ClassicalProcess:
        """Deterministic process: fn maps joint party outputs to env inputs."""
        parties = tuple(parties)
        outs = [p.env_out for p in parties]
        entries = {}
        for o in itertools.product(*(range(s) for s in outs)):
            entries[(tuple(fn(o)), o)] = ONE
        return ClassicalProcess(parties, entries)

    @staticmethod
    def from_matrix(parties: Sequence[PartySpec], m: Matrix) -> ClassicalProcess:
        parties = tuple(parties)
        ins = tuple(p.env_in for p in parties)
        outs = tuple(p.env_out for p in parties)
        if m.rows != product(ins) or m.cols != product(outs):
            raise ValueError("matrix shape does not match party alphabets")
        entries = {}
        for r in range(m.rows):
            for c in range(m.cols):
                if m[r, c] != 0:
                    entries[(unflatten_index(r, ins), unflatten_index(c, outs))] = m[r, c]
        return ClassicalProcess(parties, entries)

    @staticmethod
    def mix(weighted: Sequence[tuple[Fraction, "ClassicalProcess"]]) -> ClassicalProcess:
        if not weighted:
            raise ValueError("empty mixture")
        parties = weighted[0][1].parties
        entries: dict[tuple[Outcome, Outcome], Fraction] = {}
        for w, proc in weighted:
            if proc.parties != parties:
                raise ValueError("mixture components disagree on party specs")
            for key, p in proc.entries.items():
                entries[key] = entries.get(key, ZERO) + rat(w) * p
        return ClassicalProcess(parties, entries)


def permute_parties(e: ClassicalProcess, perm: Sequence[int]) -> ClassicalProcess:
    """Relabel party order; position k of the result is old party perm[k]."""
    parties = tuple(e.parties[j] for j in perm)
    entries = {}
    for (i, o), w in e.entries.items():
        entries[(tuple(i[j] for j in perm), tuple(o[j] for j in perm))] = w
    return ClassicalProcess(parties, entries)


# ---------------------------------------------------------------------------
# consistency checks
# ---------------------------------------------------------------------------


def check_nonnegativity(e: ClassicalProcess) -> bool:
    return all(w >= 0 for w in e.entries.values())


def operation_trace(
    e: ClassicalProcess, ops: Sequence[DeterministicOp]
) -> Fraction:
    """Total probability when each party applies a deterministic operation:
    the weight of entries lying on the loop closed by the ops."""
    for op, p in zip(ops, e.parties):
        if op.in_size != p.env_in or op.out_size != p.env_out:
            raise ValueError(f"op alphabets do not match party {p.name}")
    trace = ZERO
    for (i, o), w in e.entries.items():
        if all(op(iv) == ov for op, iv, ov in zip(ops, i, o)):
            trace += w
    return trace


@dataclass(frozen=True)
class TraceCheckResult:
    ok: bool
    ops: tuple[DeterministicOp, ...] | None = None
    trace: Fraction | None = None
    checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def check_total_probability(
    e: ClassicalProcess, cap: int | None = None
) -> TraceCheckResult:
    """Total probability must be exactly 1 for every tuple of deterministic
    local operations; by convexity that settles all stochastic ones too.
    Returns the first violating tuple (canonical enumeration order) if any.
    """
    per_party = []
    count = 1
    for p in e.parties:
        count *= p.env_out**p.env_in
    check_cap(count, cap)
    for p in e.parties:
        per_party.append(enumerate_deterministic_ops(p.env_in, p.env_out, cap=cap))
    checked = 0
    for ops in itertools.product(*per_party):
        trace = operation_trace(e, ops)
        checked += 1
        if trace != 1:
            return TraceCheckResult(False, ops, trace, checked)
    return TraceCheckResult(True, None, None, checked)


def is_logically_consistent(e: ClassicalProcess, cap: int | None = None) -> bool:
    return check_nonnegativity(e) and check_total_probability(e, cap=cap).ok


# ---------------------------------------------------------------------------
# local strategies and induced behavior
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalStrategy:
    """One party's response: P(game output, env output | game input, env input).

    The table is column-stochastic with rows flattening (game out, env out)
    and columns flattening (game in, env in), leftmost most significant.
    """

    game_in: int
    game_out: int
    env_in: int
    env_out: int
    table: StochasticMatrix

    def __post_init__(self):
        if self.table.rows != self.game_out * self.env_out:
            raise ValueError("strategy table rows do not match output alphabets")
        if self.table.cols != self.game_in * self.env_in:
            raise ValueError("strategy table cols do not match input alphabets")

    def prob(self, x: int, o: int, g: int, i: int) -> Fraction:
        r = flatten_index((x, o), (self.game_out, self.env_out))
        c = flatten_index((g, i), (self.game_in, self.env_in))
        return self.table[r, c]

    @property
    def deterministic(self) -> bool:
        return all(x in (0, 1) for row in self.table.entries for x in row)

    @staticmethod
    def from_function(
        game_in: int,
        env_in: int,
        game_out: int,
        env_out: int,
        fn: Callable[[int, int], tuple[int, int]],
    ) -> LocalStrategy:
        rows = game_out * env_out
        cols = game_in * env_in
        grid = [[ZERO] * cols for _ in range(rows)]
        for g in range(game_in):
            for i in range(env_in):
                x, o = fn(g, i)
                r = flatten_index((x, o), (game_out, env_out))
                grid[r][flatten_index((g, i), (game_in, env_in))] = ONE
        return LocalStrategy(
            game_in, game_out, env_in, env_out,
            StochasticMatrix(tuple(tuple(r) for r in grid)),
        )

    @staticmethod
    def mixture(weighted: Sequence[tuple[Fraction, "LocalStrategy"]]) -> LocalStrategy:
        if not weighted:
            raise ValueError("empty mixture")
        first = weighted[0][1]
        acc = Matrix.zeros(first.table.rows, first.table.cols)
        for w, s in weighted:
            acc = acc.add(s.table.scale(rat(w)))
        return LocalStrategy(
            first.game_in, first.game_out, first.env_in, first.env_out,
            StochasticMatrix(acc.entries),
        )


def induced_distribution(
    e: ClassicalProcess,
    strategies: Sequence[LocalStrategy],
    inputs: Sequence[int],
) -> dict[Outcome, Fraction]:
    """Joint distribution of the parties' game outputs for fixed game inputs.

    Raises InconsistentProcessError if the weights do not add up to 1, which
    is how an inconsistent process shows up on this code path.
    """
    if len(strategies) != len(e.parties):
        raise ValueError("one strategy per party required")
    for s, p in zip(strategies, e.parties):
        if (s.env_in, s.env_out) != (p.env_in, p.env_out):
            raise ValueError(f"strategy wiring does not match party {p.name}")
    out_sizes = tuple(s.game_out for s in strategies)
    result: dict[Outcome, Fraction] = {}
    for (i, o), w in e.entries.items():
        locals_ = [
            [s.prob(x, ov, g, iv) for x in range(s.game_out)]
            for s, g, iv, ov in zip(strategies, inputs, i, o)
        ]
        for xs in itertools.product(*(range(n) for n in out_sizes)):
            f = w
            for col, x in zip(locals_, xs):
                f *= col[x]
                if f == 0:
                    break
            if f != 0:
                result[xs] = result.get(xs, ZERO) + f
    total = sum(result.values(), ZERO)
    if total != 1:
        raise InconsistentProcessError(
            f"induced weights sum to {format_rational(total)}, not 1"
        )
    return result


@dataclass(frozen=True)
class Behavior:
    """Conditional distribution P(game outputs | game inputs), exact.

    rows of `table` flatten the joint outputs, columns the joint inputs,
    leftmost party most significant on both sides.
    """

    party_names: tuple[str, ...]
    in_sizes: tuple[int, ...]
    out_sizes: tuple[int, ...]
    table: StochasticMatrix

    def __post_init__(self):
        if self.table.rows != product(self.out_sizes):
            raise ValueError("behavior rows do not match output alphabets")
        if self.table.cols != product(self.in_sizes):
            raise ValueError("behavior cols do not match input alphabets")

    def prob(self, outputs: Sequence[int], inputs: Sequence[int]) -> Fraction:
        r = flatten_index(outputs, self.out_sizes)
        c = flatten_index(inputs, self.in_sizes)
        return self.table[r, c]


def induced_behavior(
    e: ClassicalProcess, strategies: Sequence[LocalStrategy]
) -> Behavior:
    in_sizes = tuple(s.game_in for s in strategies)
    out_sizes = tuple(s.game_out for s in strategies)
    cols = []
    for a in itertools.product(*(range(n) for n in in_sizes)):
        dist = induced_distribution(e, strategies, a)
        col = [ZERO] * product(out_sizes)
        for xs, w in dist.items():
            col[flatten_index(xs, out_sizes)] = w
        cols.append(col)
    rows = tuple(tuple(col[r] for col in cols) for r in range(product(out_sizes)))
    return Behavior(
        tuple(p.name for p in e.parties), in_sizes, out_sizes,
        StochasticMatrix(rows),
    )


# ---------------------------------------------------------------------------
# signaling relations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CausalRelationReport:
    """Pairwise signaling structure of a behavior.

    correlated lists ordered pairs (p, q) where p's input influences q's
    output; relations lists (p, q) with p in q's causal past (p influences q
    but not conversely).  uninfluenced_parties are those whose output is
    independent of every other party's input; at least one such party must
    exist for the behavior to admit any causal account.
    """

    parties: tuple[str, ...]
    correlated: tuple[tuple[str, str], ...]
    relations: tuple[tuple[str, str], ...]
    uninfluenced_parties: tuple[str, ...]

    @property
    def uninfluenced_party_exists(self) -> bool:
        return bool(self.uninfluenced_parties)


def _output_marginals(b: Behavior, q: int, p: int):
    """For input party q and output party p: the distribution of p's output
    per value of q's input, averaged uniformly over all other inputs."""
    n = len(b.in_sizes)
    others = [k for k in range(n) if k != q]
    other_count = product(b.in_sizes[k] for k in others)
    weight = Fraction(1, other_count)
    dists = []
    for aq in range(b.in_sizes[q]):
        dist = [ZERO] * b.out_sizes[p]
        for rest in itertools.product(*(range(b.in_sizes[k]) for k in others)):
            a = [0] * n
            a[q] = aq
            for k, v in zip(others, rest):
                a[k] = v
            col = b.table.column(flatten_index(a, b.in_sizes))
            for r, w in enumerate(col):
                if w != 0:
                    xp = unflatten_index(r, b.out_sizes)[p]
                    dist[xp] += w * weight
        dists.append(tuple(dist))
    return dists


def signals(b: Behavior, q: int, p: int) -> bool:
    """True when party q's input is correlated with party p's output."""
    dists = _output_marginals(b, q, p)
    return any(d != dists[0] for d in dists[1:])


def infer_relations(b: Behavior) -> CausalRelationReport:
    n = len(b.party_names)
    corr = {}
    for q in range(n):
        for p in range(n):
            if p != q:
                corr[(q, p)] = signals(b, q, p)
    correlated = tuple(
        (b.party_names[q], b.party_names[p])
        for (q, p), c in sorted(corr.items())
        if c
    )
    relations = tuple(
        (b.party_names[p], b.party_names[q])
        for p in range(n)
        for q in range(n)
        if p != q and corr[(p, q)] and not corr[(q, p)]
    )
    uninfluenced = tuple(
        b.party_names[p]
        for p in range(n)
        if all(not corr[(q, p)] for q in range(n) if q != p)
    )
    return CausalRelationReport(b.party_names, correlated, relations, uninfluenced)


# ---------------------------------------------------------------------------
# classification against all deterministic strategies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    causal: bool
    witness: tuple[LocalStrategy, ...] | None = None
    witness_report: CausalRelationReport | None = None


def classify(e: ClassicalProcess, cap: int | None = None) -> Classification:
    """Search deterministic strategies for a behavior no causal order explains.

    A deterministic strategy splits into the map (game in, env in) -> env out
    fed back to the process and the map to the game output.  Only the first
    part shapes the wire distribution, so the sweep enumerates those maps and
    then checks, cell by cell, whether some output relabeling would correlate
    a party's output with another's input after uniform averaging; a single
    indicator cell suffices exactly when some relabeling does.  Requires a
    logically consistent process.
    """
    parties = e.parties
    n = len(parties)
    count = 1
    for p in parties:
        count *= p.env_out ** (p.game_in * p.env_in)
    check_cap(count, cap)

    env_maps_per_party = []
    for p in parties:
        domain = p.game_in * p.env_in
        env_maps_per_party.append(
            list(itertools.product(range(p.env_out), repeat=domain))
        )
    game_inputs = list(
        itertools.product(*(range(p.game_in) for p in parties))
    )
    env_inputs = list(
        itertools.product(*(range(p.env_in) for p in parties))
    )

    def env_out_for(maps, a, i):
        return tuple(
            m[flatten_index((av, iv), (p.game_in, p.env_in))]
            for m, p, av, iv in zip(maps, parties, a, i)
        )

    for maps in itertools.product(*env_maps_per_party):
        # wire marginals: per party p, per joint game input, dist of env-in
        marg = [
            {a: [ZERO] * parties[p].env_in for a in game_inputs} for p in range(n)
        ]
        for a in game_inputs:
            for i in env_inputs:
                w = e.entries.get((i, env_out_for(maps, a, i)))
                if w:
                    for p in range(n):
                        marg[p][a][i[p]] += w
        cells = _violating_cells(parties, game_inputs, marg)
        if cells is not None:
            witness = tuple(
                _witness_strategy(parties[p], maps[p], cells[p]) for p in range(n)
            )
            report = infer_relations(induced_behavior(e, witness))
            if report.uninfluenced_party_exists:
                raise AssertionError("witness construction failed to signal")
            return Classification(False, witness, report)
    return Classification(True)


def _violating_cells(parties, game_inputs, marg):
    """For each party p, find some other party q and a cell (a_p, i_p) whose
    averaged weight depends on q's input.  None if any party has no such q."""
    n = len(parties)
    cells = []
    for p in range(n):
        found = None
        for q in range(n):
            if q == p or found:
                continue
            for ap in range(parties[p].game_in):
                if found:
                    break
                for ip in range(parties[p].env_in):
                    per_q = {}
                    for a in game_inputs:
                        if a[p] != ap:
                            continue
                        per_q.setdefault(a[q], ZERO)
                        per_q[a[q]] += marg[p][a][ip]
                    values = list(per_q.values())
                    if any(v != values[0] for v in values[1:]):
                        found = (ap, ip)
                        break
        if found is None:
            return None
        cells.append(found)
    return cells


def _witness_strategy(party: PartySpec, env_map, cell) -> LocalStrategy:
    ap, ip = cell

    def fn(g, i):
        o = env_map[flatten_index((g, i), (party.game_in, party.env_in))]
        x = 1 if (g, i) == (ap, ip) else 0
        return x, o

    return LocalStrategy.from_function(
        party.game_in, party.env_in, party.game_out, party.env_out, fn
    )


# ---------------------------------------------------------------------------
# two-party causal membership
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MembershipResult:
    """Decomposition P = p * (first leads) + (1-p) * (second leads), if any.

    first_term and second_term are the unnormalized summands; they add up to
    the original table entry for entry when member is True.
    """

    member: bool
    weight_first: Fraction | None = None
    first_term: Matrix | None = None
    second_term: Matrix | None = None

    def __bool__(self) -> bool:
        return self.member


def two_party_causal_membership(b: Behavior) -> MembershipResult:
    """Exact feasibility of a causal decomposition for a two-party behavior.

    The first summand must have the first party's output marginal independent
    of the second party's input (first acts first) and carry the same weight
    p under every input pair; symmetrically for the second summand.
    """
    if len(b.in_sizes) != 2:
        raise ValueError("membership test is defined for exactly two parties")
    a_size, b_size = b.in_sizes
    x_size, y_size = b.out_sizes

    cells = [
        (x, y, av, bv)
        for x in range(x_size)
        for y in range(y_size)
        for av in range(a_size)
        for bv in range(b_size)
    ]
    r1 = {c: ("r1",) + c for c in cells}
    r2 = {c: ("r2",) + c for c in cells}
    P = "p"
    cons = []
    for c in cells:
        x, y, av, bv = c
        cons.append(lp.eq({r1[c]: 1, r2[c]: 1}, b.prob((x, y), (av, bv))))
    # first party's output marginal in the first term: no dependence on b
    for x in range(x_size):
        for av in range(a_size):
            for bv in range(1, b_size):
                coeffs = {}
                for y in range(y_size):
                    coeffs[r1[(x, y, av, bv)]] = 1
                    coeffs[r1[(x, y, av, 0)]] = -1
                cons.append(lp.eq(coeffs, 0))
    # second party's output marginal in the second term: no dependence on a
    for y in range(y_size):
        for bv in range(b_size):
            for av in range(1, a_size):
                coeffs = {}
                for x in range(x_size):
                    coeffs[r2[(x, y, av, bv)]] = 1
                    coeffs[r2[(x, y, 0, bv)]] = -1
                cons.append(lp.eq(coeffs, 0))
    # the first term carries the same mass p under every input pair
    for av in range(a_size):
        for bv in range(b_size):
            coeffs = {P: -1}
            for x in range(x_size):
                for y in range(y_size):
                    coeffs[r1[(x, y, av, bv)]] = 1
            cons.append(lp.eq(coeffs, 0))

    nonneg = list(r1.values()) + list(r2.values()) + [P]
    witness = lp.lp_feasible(cons, nonneg=nonneg)
    if witness is None:
        return MembershipResult(False)

    def term(rvars) -> Matrix:
        rows = [[ZERO] * (a_size * b_size) for _ in range(x_size * y_size)]
        for (x, y, av, bv), var in rvars.items():
            r = flatten_index((x, y), (x_size, y_size))
            c = flatten_index((av, bv), (a_size, b_size))
            rows[r][c] = witness[var]
        return Matrix(tuple(tuple(r) for r in rows))

    return MembershipResult(True, witness[P], term(r1), term(r2))


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def _bit_parties(names: str) -> tuple[PartySpec, ...]:
    return tuple(PartySpec(n, 2, 2) for n in names)


def cyclic_identity(o: Outcome) -> Outcome:
    """Each party receives the previous party's output: i_k = o_{k-1}."""
    return (o[-1],) + o[:-1]


def cyclic_flip(o: Outcome) -> Outcome:
    return tuple(v ^ 1 for v in cyclic_identity(o))


def _majority_map(o: Outcome) -> Outcome:
    r, s, t = o
    if r + s + t <= 1:  # majority of outputs is 0: forward along the cycle
        return (t, r, s)
    return (s ^ 1, t ^ 1, r ^ 1)  # majority 1: flip and reverse the cycle


PROCESS_PRESETS = (
    "circular-mixture",
    "majority",
    "identity-chain",
    "two-channel-loop",
    "perturbed-mixture",
)


def preset_process(name: str) -> ClassicalProcess:
    three = _bit_parties("RST")
    if name == "circular-mixture":
        return ClassicalProcess.mix(
            [
                (Fraction(1, 2), ClassicalProcess.from_function(three, cyclic_identity)),
                (Fraction(1, 2), ClassicalProcess.from_function(three, cyclic_flip)),
            ]
        )
    if name == "perturbed-mixture":
        return ClassicalProcess.mix(
            [
                (Fraction(51, 100), ClassicalProcess.from_function(three, cyclic_identity)),
                (Fraction(49, 100), ClassicalProcess.from_function(three, cyclic_flip)),
            ]
        )
    if name == "majority":
        return ClassicalProcess.from_function(three, _majority_map)
    if name == "identity-chain":
        return ClassicalProcess.from_function(three, lambda o: (0, o[0], o[1]))
    if name == "two-channel-loop":
        return ClassicalProcess.from_function(
            _bit_parties("RS"), lambda o: (o[1], o[0])
        )
    raise KeyError(f"unknown process preset {name!r}; choose from {PROCESS_PRESETS}")


BEHAVIOR_PRESETS = ("one-way", "two-way")


def preset_behavior(name: str) -> Behavior:
    if name == "one-way":
        # second party's input reaches the first; second's output is a fair coin
        table = [
            [
                Fraction(1, 2) if x == bv else ZERO
                for (av, bv) in itertools.product(range(2), range(2))
            ]
            for (x, y) in itertools.product(range(2), range(2))
        ]
        return Behavior(("R", "S"), (2, 2), (2, 2), StochasticMatrix(tuple(map(tuple, table))))
    if name == "two-way":
        table = [
            [
                ONE if (x == bv and y == av) else ZERO
                for (av, bv) in itertools.product(range(2), range(2))
            ]
            for (x, y) in itertools.product(range(2), range(2))
        ]
        return Behavior(("R", "S"), (2, 2), (2, 2), StochasticMatrix(tuple(map(tuple, table))))
    raise KeyError(f"unknown behavior preset {name!r}; choose from {BEHAVIOR_PRESETS}")


# ---------------------------------------------------------------------------
# file format
#
# Shared grammar for process and behavior tables:
#     party NAME LEFT_SIZE RIGHT_SIZE
#     v1 .. vn | w1 .. wn : p/q
# Lines left of the bar list the distributed variable (environment inputs for
# processes, game outputs for behaviors); right of the bar the conditioning
# variable.  '#' starts a comment, omitted entries are zero.
# ---------------------------------------------------------------------------


def _parse_table(text: str):
    names: list[str] = []
    left_sizes: list[int] = []
    right_sizes: list[int] = []
    entries: dict[tuple[Outcome, Outcome], Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("party"):
            if entries:
                raise FileFormatError(f"line {lineno}: party after table entries")
            parts = line.split()
            if len(parts) != 4:
                raise FileFormatError(
                    f"line {lineno}: expected 'party NAME LEFT RIGHT'"
                )
            try:
                left, right = int(parts[2]), int(parts[3])
            except ValueError:
                raise FileFormatError(f"line {lineno}: alphabet sizes must be integers")
            if left < 1 or right < 1:
                raise FileFormatError(f"line {lineno}: alphabet sizes must be positive")
            names.append(parts[1])
            left_sizes.append(left)
            right_sizes.append(right)
            continue
        if ":" not in line or "|" not in line:
            raise FileFormatError(
                f"line {lineno}: expected 'v.. | w.. : p/q' or a party header"
            )
        if not names:
            raise FileFormatError(f"line {lineno}: table entry before any party line")
        body, prob = line.rsplit(":", 1)
        leftpart, rightpart = body.split("|", 1)
        try:
            lvals = tuple(int(v) for v in leftpart.split())
            rvals = tuple(int(v) for v in rightpart.split())
        except ValueError:
            raise FileFormatError(f"line {lineno}: values must be integers")
        if len(lvals) != len(names) or len(rvals) != len(names):
            raise FileFormatError(
                f"line {lineno}: expected {len(names)} values on each side of the bar"
            )
        for v, s in zip(lvals, left_sizes):
            if not 0 <= v < s:
                raise FileFormatError(f"line {lineno}: value {v} out of range")
        for v, s in zip(rvals, right_sizes):
            if not 0 <= v < s:
                raise FileFormatError(f"line {lineno}: value {v} out of range")
        try:
            p = rat(prob)
        except (ValueError, ZeroDivisionError):
            raise FileFormatError(f"line {lineno}: bad rational {prob.strip()!r}")
        if (lvals, rvals) in entries:
            raise FileFormatError(f"line {lineno}: duplicate entry")
        entries[(lvals, rvals)] = p
    if not names:
        raise FileFormatError("line 1: no party declarations found")
    return tuple(names), tuple(left_sizes), tuple(right_sizes), entries


def parse_process(text: str) -> ClassicalProcess:
    names, ins, outs, entries = _parse_table(text)
    parties = tuple(
        PartySpec(n, i, o) for n, i, o in zip(names, ins, outs)
    )
    return ClassicalProcess(parties, entries)


def format_process(e: ClassicalProcess) -> str:
    lines = [f"party {p.name} {p.env_in} {p.env_out}" for p in e.parties]
    for (i, o), w in sorted(e.entries.items()):
        lines.append(
            " ".join(str(v) for v in i)
            + " | "
            + " ".join(str(v) for v in o)
            + " : "
            + format_rational(w)
        )
    return "\n".join(lines) + "\n"


def parse_behavior(text: str) -> Behavior:
    names, outs, ins, entries = _parse_table(text)
    rows = [[ZERO] * product(ins) for _ in range(product(outs))]
    for (x, a), w in entries.items():
        rows[flatten_index(x, outs)][flatten_index(a, ins)] = w
    return Behavior(names, ins, outs, StochasticMatrix(tuple(map(tuple, rows))))


def format_behavior(b: Behavior) -> str:
    lines = [
        f"party {n} {o} {i}"
        for n, o, i in zip(b.party_names, b.out_sizes, b.in_sizes)
    ]
    for c in range(b.table.cols):
        a = unflatten_index(c, b.in_sizes)
        for r in range(b.table.rows):
            w = b.table[r, c]
            if w != 0:
                x = unflatten_index(r, b.out_sizes)
                lines.append(
                    " ".join(str(v) for v in x)
                    + " | "
                    + " ".join(str(v) for v in a)
                    + " : "
                    + format_rational(w)
                )
    return "\n".join(lines) + "\n"
