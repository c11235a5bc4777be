"""Multipartite guessing games and exact causal bounds.

A game hands every party a private input (plus an optional shared one) and
pays out according to a predicate on inputs and outputs.  The causal bound
is the best success probability achievable when some party acts first and
each later party learns every earlier input; the first party may choose the
order of its causal future based on what it sees.  That search space contains
the deterministic extreme points of causally ordered behaviors, so its
maximum bounds every causal strategy, mixtures included.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import (
    ZERO,
    ONE,
    StochasticVector,
    check_cap,
    flatten_index,
    product,
    unflatten_index,
)
from .process import (
    ClassicalProcess,
    FileFormatError,
    LocalStrategy,
    Outcome,
    PartySpec,
    induced_distribution,
)


@dataclass(frozen=True)
class GameParty:
    name: str
    input_size: int
    input_dist: StochasticVector
    output_size: int

    def __post_init__(self):
        if self.input_dist.size != self.input_size:
            raise ValueError("input distribution size mismatch")


@dataclass(frozen=True)
class GameSpec:
    """Finite game with exact input distributions and a truth-table predicate.

    wins lists every (shared value, input tuple, output tuple) that pays out.
    conditions partitions (shared value, input tuple) space into labeled
    groups for reporting conditional success rates.
    """

    name: str
    parties: tuple[GameParty, ...]
    shared_size: int
    shared_dist: StochasticVector
    wins: frozenset[tuple[int, Outcome, Outcome]]
    conditions: tuple[tuple[str, frozenset[tuple[int, Outcome]]], ...]

    def __post_init__(self):
        if self.shared_dist.size != self.shared_size:
            raise ValueError("shared distribution size mismatch")
        space = {
            (m, a)
            for m in range(self.shared_size)
            for a in itertools.product(*(range(p.input_size) for p in self.parties))
        }
        covered: set = set()
        for _, group in self.conditions:
            if covered & group:
                raise ValueError("overlapping condition groups")
            covered |= group
        if covered != space:
            raise ValueError("conditions do not partition the input space")

    def win(self, m: int, inputs: Outcome, outputs: Outcome) -> bool:
        return (m, tuple(inputs), tuple(outputs)) in self.wins

    def strategy_input(self, party: int, private: int, m: int) -> int:
        """Game input handed to a LocalStrategy: (private, shared) flattened."""
        return flatten_index((private, m), (self.parties[party].input_size, self.shared_size))


@dataclass(frozen=True)
class GameResult:
    success: Fraction
    breakdown: tuple[tuple[str, Fraction], ...]


def _input_tuples(game: GameSpec):
    return itertools.product(*(range(p.input_size) for p in game.parties))


def _input_weight(game: GameSpec, inputs: Outcome) -> Fraction:
    w = ONE
    for p, a in zip(game.parties, inputs):
        w *= p.input_dist[a]
    return w


def _condition_label(game: GameSpec, m: int, inputs: Outcome) -> str:
    for label, group in game.conditions:
        if (m, tuple(inputs)) in group:
            return label
    raise AssertionError("conditions were validated to cover the space")


def _result_from_cells(game: GameSpec, win_prob) -> GameResult:
    """win_prob: callable (m, inputs) -> Fraction success probability."""
    total = ZERO
    cond_mass: dict[str, Fraction] = {}
    cond_win: dict[str, Fraction] = {}
    for m in range(game.shared_size):
        pm = game.shared_dist[m]
        if pm == 0:
            continue
        for inputs in _input_tuples(game):
            w = pm * _input_weight(game, inputs)
            if w == 0:
                continue
            v = win_prob(m, inputs)
            label = _condition_label(game, m, inputs)
            cond_mass[label] = cond_mass.get(label, ZERO) + w
            cond_win[label] = cond_win.get(label, ZERO) + w * v
            total += w * v
    breakdown = tuple(
        (label, cond_win[label] / cond_mass[label])
        for label, _ in game.conditions
        if label in cond_mass
    )
    return GameResult(total, breakdown)


def play(
    game: GameSpec, e: ClassicalProcess, strategies: Sequence[LocalStrategy]
) -> GameResult:
    """Exact success probability of local strategies over a process."""
    if len(strategies) != len(game.parties):
        raise ValueError("one strategy per game party required")
    for s, p in zip(strategies, game.parties):
        if s.game_in != p.input_size * game.shared_size:
            raise ValueError(f"strategy for {p.name} has wrong game-input alphabet")
        if s.game_out != p.output_size:
            raise ValueError(f"strategy for {p.name} has wrong game-output alphabet")

    def win_prob(m: int, inputs: Outcome) -> Fraction:
        encoded = tuple(
            game.strategy_input(k, a, m) for k, a in enumerate(inputs)
        )
        dist = induced_distribution(e, strategies, encoded)
        return sum(
            (w for xs, w in dist.items() if game.win(m, inputs, xs)), ZERO
        )

    return _result_from_cells(game, win_prob)


# ---------------------------------------------------------------------------
# causal bound
# ---------------------------------------------------------------------------


@dataclass
class CausalStrategy:
    """Deterministic one-party-first protocol with full forwarding.

    order maps (shared value, first party's input) to the schedule of the
    remaining parties.  outputs maps (party, shared value, visible) to that
    party's answer, where visible lists (party index, input value) pairs for
    every party up to and including itself in schedule order, sorted by index.
    """

    first: int
    order: dict[tuple[int, int], tuple[int, ...]]
    outputs: dict[tuple[int, int, tuple[tuple[int, int], ...]], int]


def evaluate_causal_strategy(game: GameSpec, cs: CausalStrategy) -> GameResult:
    def win_prob(m: int, inputs: Outcome) -> Fraction:
        known = {cs.first: inputs[cs.first]}
        xs = {cs.first: cs.outputs[(cs.first, m, tuple(sorted(known.items())))]}
        for p in cs.order[(m, inputs[cs.first])]:
            known[p] = inputs[p]
            xs[p] = cs.outputs[(p, m, tuple(sorted(known.items())))]
        outs = tuple(xs[k] for k in range(len(game.parties)))
        return ONE if game.win(m, inputs, outs) else ZERO

    return _result_from_cells(game, win_prob)


def _walk(game, m, schedule, k, known, xs):
    """Best expected win over inputs of schedule[k:], outputs chosen per slot
    with knowledge of every earlier input.  Returns (value, decision table)."""
    if k == len(schedule):
        inputs = tuple(known[i] for i in range(len(game.parties)))
        outs = tuple(xs[i] for i in range(len(game.parties)))
        return (ONE if game.win(m, inputs, outs) else ZERO), {}
    p = schedule[k]
    party = game.parties[p]
    total = ZERO
    rec: dict = {}
    for a in range(party.input_size):
        known[p] = a
        visible = tuple(sorted(known.items()))
        best = best_rec = best_x = None
        for x in range(party.output_size):
            xs[p] = x
            v, r = _walk(game, m, schedule, k + 1, known, xs)
            if best is None or v > best:
                best, best_rec, best_x = v, r, x
        del xs[p]
        rec.update(best_rec)
        rec[(p, m, visible)] = best_x
        total += party.input_dist[a] * best
    del known[p]
    return total, rec


def _bound_with_first(game: GameSpec, f: int) -> tuple[Fraction, CausalStrategy]:
    others = [k for k in range(len(game.parties)) if k != f]
    total = ZERO
    order: dict = {}
    outputs: dict = {}
    for m in range(game.shared_size):
        for a_f in range(game.parties[f].input_size):
            best = best_rec = best_pi = best_x = None
            for x_f in range(game.parties[f].output_size):
                for pi in itertools.permutations(others):
                    v, rec = _walk(game, m, pi, 0, {f: a_f}, {f: x_f})
                    if best is None or v > best:
                        best, best_rec, best_pi, best_x = v, rec, pi, x_f
            order[(m, a_f)] = best_pi
            outputs.update(best_rec)
            outputs[(f, m, ((f, a_f),))] = best_x
            total += game.shared_dist[m] * game.parties[f].input_dist[a_f] * best
    return total, CausalStrategy(f, order, outputs)


def causal_bound(
    game: GameSpec, cap: int | None = None
) -> tuple[GameResult, CausalStrategy]:
    """Exact maximum over deterministic causal strategies, with a witness.

    The witness re-evaluates to the bound through evaluate_causal_strategy;
    chain_process realizes it as a logically consistent process for the
    generic play() pipeline.
    """
    n = len(game.parties)
    contexts = n * game.shared_size
    for p in game.parties:
        contexts *= p.input_size * p.output_size
    for k in range(2, n):
        contexts *= k
    check_cap(contexts, cap)

    best: tuple[Fraction, CausalStrategy] | None = None
    for f in range(n):
        value, cs = _bound_with_first(game, f)
        if best is None or value > best[0]:
            best = (value, cs)
    result = evaluate_causal_strategy(game, best[1])
    if result.success != best[0]:
        raise AssertionError("witness does not reproduce the computed bound")
    return result, best[1]


# ---------------------------------------------------------------------------
# realizing a causal strategy as a process
# ---------------------------------------------------------------------------


def chain_process(
    game: GameSpec, cs: CausalStrategy
) -> tuple[ClassicalProcess, tuple[LocalStrategy, ...]]:
    """Causal process + local strategies that reproduce a CausalStrategy.

    Every party announces its private input to the environment (the first
    one also announces the shared value, which fixes the routing); the
    process forwards to each party the inputs of everyone scheduled before
    it, encoded with a 'not yet available' marker per foreign party.
    """
    n = len(game.parties)
    f = cs.first
    in_sizes = [p.input_size for p in game.parties]
    marker_sizes = {
        p: tuple(in_sizes[q] + 1 for q in range(n) if q != p) for p in range(n)
    }
    specs = tuple(
        PartySpec(
            game.parties[p].name,
            env_in=product(marker_sizes[p]),
            env_out=in_sizes[p] * game.shared_size if p == f else in_sizes[p],
            game_in=in_sizes[p] * game.shared_size,
            game_out=game.parties[p].output_size,
        )
        for p in range(n)
    )

    def encode_known(p: int, known: dict[int, int]) -> int:
        comps = tuple(
            (known[q] + 1 if q in known else 0)
            for q in range(n)
            if q != p
        )
        return flatten_index(comps, marker_sizes[p])

    def env_map(outs: Outcome) -> Outcome:
        a_f, m = unflatten_index(outs[f], (in_sizes[f], game.shared_size))
        privates = {q: (a_f if q == f else outs[q]) for q in range(n)}
        schedule = (f,) + tuple(cs.order[(m, a_f)])
        known: dict[int, int] = {}
        ins = [0] * n
        for p in schedule:
            ins[p] = encode_known(p, known)
            known[p] = privates[p]
        return tuple(ins)

    e = ClassicalProcess.from_function(specs, env_map)

    strategies = []
    for p in range(n):
        spec = specs[p]

        def fn(g, i, p=p, spec=spec):
            a, m = unflatten_index(g, (in_sizes[p], game.shared_size))
            comps = unflatten_index(i, marker_sizes[p])
            known = {}
            for q, c in zip((q for q in range(n) if q != p), comps):
                if c > 0:
                    known[q] = c - 1
            known[p] = a
            visible = tuple(sorted(known.items()))
            x = cs.outputs.get((p, m, visible), 0)
            o = flatten_index((a, m), (in_sizes[p], game.shared_size)) if p == f else a
            return x, o

        strategies.append(
            LocalStrategy.from_function(
                spec.game_in, spec.env_in, spec.game_out, spec.env_out, fn
            )
        )
    return e, tuple(strategies)


# ---------------------------------------------------------------------------
# builtin games
# ---------------------------------------------------------------------------


def _uniform_party(name: str, input_size: int, output_size: int = 2) -> GameParty:
    return GameParty(name, input_size, StochasticVector.uniform(input_size), output_size)


def _majority(bits: Outcome) -> int:
    return 1 if sum(bits) * 2 > len(bits) else 0


BUILTIN_GAMES = ("game1", "game2", "game3")


def builtin_game(name: str) -> GameSpec:
    if name == "game1":
        # Two parties.  The second party's input packs (b, flag); on flag 0 the
        # first party must output b, on flag 1 the second must output a.
        parties = (_uniform_party("R", 2), _uniform_party("S", 4))
        wins = set()
        for a, bidx, x, y in itertools.product(range(2), range(4), range(2), range(2)):
            b, flag = divmod(bidx, 2)
            if (flag == 0 and x == b) or (flag == 1 and y == a):
                wins.add((0, (a, bidx), (x, y)))
        conditions = tuple(
            (
                f"flag={fl}",
                frozenset(
                    (0, (a, b * 2 + fl)) for a in range(2) for b in range(2)
                ),
            )
            for fl in range(2)
        )
        return GameSpec(
            name, parties, 1, StochasticVector.uniform(1), frozenset(wins), conditions
        )
    if name == "game2":
        # Shared ternary pointer m; party m must output the XOR of the other
        # two private bits.
        parties = tuple(_uniform_party(n, 2) for n in "RST")
        wins = set()
        for m in range(3):
            for ins in itertools.product(range(2), repeat=3):
                goal = ins[(m + 1) % 3] ^ ins[(m + 2) % 3]
                for outs in itertools.product(range(2), repeat=3):
                    if outs[m] == goal:
                        wins.add((m, ins, outs))
        conditions = tuple(
            (
                f"m={m}",
                frozenset((m, ins) for ins in itertools.product(range(2), repeat=3)),
            )
            for m in range(3)
        )
        return GameSpec(
            name, parties, 3, StochasticVector.uniform(3), frozenset(wins), conditions
        )
    if name == "game3":
        # Each party guesses a neighbor's input; the majority of the inputs
        # selects the neighbor direction and whether answers are negated.
        parties = tuple(_uniform_party(n, 2) for n in "RST")
        wins = set()
        for ins in itertools.product(range(2), repeat=3):
            a, b, c = ins
            if _majority(ins) == 0:
                wins.add((0, ins, (c, a, b)))
            else:
                wins.add((0, ins, (b ^ 1, c ^ 1, a ^ 1)))
        conditions = tuple(
            (
                f"majority={v}",
                frozenset(
                    (0, ins)
                    for ins in itertools.product(range(2), repeat=3)
                    if _majority(ins) == v
                ),
            )
            for v in range(2)
        )
        return GameSpec(
            name, parties, 1, StochasticVector.uniform(1), frozenset(wins), conditions
        )
    raise KeyError(f"unknown builtin game {name!r}; choose from {BUILTIN_GAMES}")


STRATEGY_PRESETS = ("game2", "game3")


def preset_strategies(name: str) -> tuple[LocalStrategy, ...]:
    """Local strategies winning game2 on circular-mixture / game3 on majority."""
    if name == "game2":
        # Per shared value m, the guessing party relays the wire to its game
        # output; the two others thread their private bits around the cycle.
        def r_fn(g, i):
            a, m = divmod(g, 3)
            return ((i, 0), (0, i ^ a), (0, a))[m]

        def s_fn(g, i):
            b, m = divmod(g, 3)
            return ((0, b), (i, 0), (0, i ^ b))[m]

        def t_fn(g, i):
            c, m = divmod(g, 3)
            return ((0, i ^ c), (0, c), (i, 0))[m]

        return tuple(
            LocalStrategy.from_function(6, 2, 2, 2, fn) for fn in (r_fn, s_fn, t_fn)
        )
    if name == "game3":
        # Answer with the wire value, feed the private input back in.
        def copy_fn(g, i):
            return i, g

        return tuple(LocalStrategy.from_function(2, 2, 2, 2, copy_fn) for _ in range(3))
    raise KeyError(f"unknown strategy preset {name!r}; choose from {STRATEGY_PRESETS}")


# ---------------------------------------------------------------------------
# game files
#
#     game NAME
#     shared SIZE : p/q ...            (optional, defaults to size 1)
#     party NAME SIZE : p/q ... -> OUTSIZE
#     win M | A B C | X Y Z            (winning rows; '*' wildcard in outputs)
# ---------------------------------------------------------------------------


def parse_game(text: str) -> GameSpec:
    name = None
    shared_size = 1
    shared_dist = StochasticVector.uniform(1)
    parties: list[GameParty] = []
    win_rows: list[tuple[int, Outcome, tuple[str, ...], int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "game":
            if len(parts) != 2:
                raise FileFormatError(f"line {lineno}: expected 'game NAME'")
            name = parts[1]
        elif parts[0] == "shared":
            try:
                shared_size = int(parts[1])
                assert parts[2] == ":"
                weights = parts[3:]
                shared_dist = StochasticVector.of(weights)
            except (IndexError, ValueError, AssertionError):
                raise FileFormatError(
                    f"line {lineno}: expected 'shared SIZE : p/q ...'"
                )
            if shared_dist.size != shared_size:
                raise FileFormatError(f"line {lineno}: shared distribution size mismatch")
        elif parts[0] == "party":
            try:
                pname = parts[1]
                size = int(parts[2])
                assert parts[3] == ":"
                arrow = parts.index("->")
                dist = StochasticVector.of(parts[4:arrow])
                out_size = int(parts[arrow + 1])
            except (IndexError, ValueError, AssertionError):
                raise FileFormatError(
                    f"line {lineno}: expected 'party NAME SIZE : p/q ... -> OUTSIZE'"
                )
            if dist.size != size:
                raise FileFormatError(f"line {lineno}: input distribution size mismatch")
            parties.append(GameParty(pname, size, dist, out_size))
        elif parts[0] == "win":
            body = line[len("win"):]
            pieces = body.split("|")
            if len(pieces) != 3:
                raise FileFormatError(
                    f"line {lineno}: expected 'win M | inputs | outputs'"
                )
            try:
                m = int(pieces[0])
                ins = tuple(int(v) for v in pieces[1].split())
                outs = tuple(v for v in pieces[2].split())
            except ValueError:
                raise FileFormatError(f"line {lineno}: bad win row")
            win_rows.append((m, ins, outs, lineno))
        else:
            raise FileFormatError(f"line {lineno}: unrecognized directive {parts[0]!r}")
    if name is None:
        raise FileFormatError("line 1: missing 'game NAME' header")
    if not parties:
        raise FileFormatError("line 1: no party declarations")

    wins: set[tuple[int, Outcome, Outcome]] = set()
    for m, ins, outs, lineno in win_rows:
        if not 0 <= m < shared_size:
            raise FileFormatError(f"line {lineno}: shared value out of range")
        if len(ins) != len(parties) or len(outs) != len(parties):
            raise FileFormatError(f"line {lineno}: arity mismatch in win row")
        for v, p in zip(ins, parties):
            if not 0 <= v < p.input_size:
                raise FileFormatError(f"line {lineno}: input value out of range")
        choices = []
        for v, p in zip(outs, parties):
            if v == "*":
                choices.append(range(p.output_size))
            else:
                try:
                    iv = int(v)
                except ValueError:
                    raise FileFormatError(f"line {lineno}: bad output value {v!r}")
                if not 0 <= iv < p.output_size:
                    raise FileFormatError(f"line {lineno}: output value out of range")
                choices.append((iv,))
        for combo in itertools.product(*choices):
            wins.add((m, ins, tuple(combo)))

    if shared_size > 1:
        conditions = tuple(
            (
                f"m={m}",
                frozenset(
                    (m, ins)
                    for ins in itertools.product(
                        *(range(p.input_size) for p in parties)
                    )
                ),
            )
            for m in range(shared_size)
        )
    else:
        conditions = (
            (
                "all",
                frozenset(
                    (0, ins)
                    for ins in itertools.product(
                        *(range(p.input_size) for p in parties)
                    )
                ),
            ),
        )
    return GameSpec(
        name, tuple(parties), shared_size, shared_dist, frozenset(wins), conditions
    )
