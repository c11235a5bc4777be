from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from noncausal.exact import D_ID, D_NOT, DeterministicOp, StochasticMatrix
from noncausal.process import (
    Behavior,
    ClassicalProcess,
    FileFormatError,
    InconsistentProcessError,
    LocalStrategy,
    PartySpec,
    check_nonnegativity,
    check_total_probability,
    classify,
    format_behavior,
    format_process,
    induced_behavior,
    induced_distribution,
    infer_relations,
    is_logically_consistent,
    operation_trace,
    parse_behavior,
    parse_process,
    permute_parties,
    preset_behavior,
    preset_process,
    two_party_causal_membership,
)


def bit_parties(names):
    return tuple(PartySpec(n, 2, 2) for n in names)


def test_preset_processes_consistent():
    for name in ("circular-mixture", "majority", "identity-chain"):
        assert is_logically_consistent(preset_process(name)), name


def test_two_channel_loop_not_consistent():
    e = preset_process("two-channel-loop")
    assert check_nonnegativity(e)
    res = check_total_probability(e)
    assert not res
    assert res.ops == (D_ID, D_ID)
    assert res.trace == 2


def test_perturbed_mixture_not_consistent():
    res = check_total_probability(preset_process("perturbed-mixture"))
    assert not res
    assert res.ops == (D_ID, D_ID, D_ID)
    assert res.trace == Fraction(51, 50)


def test_single_party_identity_loop_fails():
    e = ClassicalProcess.from_function((PartySpec("R", 2, 2),), lambda o: o)
    res = check_total_probability(e)
    assert not res
    assert res.ops == (D_ID,)
    assert res.trace == 2
    # the negation loop has no consistent assignment at all
    assert operation_trace(e, (D_NOT,)) == 0


def test_negative_entry_fails_nonnegativity():
    e = preset_process("identity-chain")
    bad = ClassicalProcess(e.parties, dict(e.entries))
    bad.entries[((1, 1, 1), (1, 1, 1))] = Fraction(-1, 4)
    assert not check_nonnegativity(bad)
    assert not is_logically_consistent(bad)


def test_operation_trace_counts_loop_weight():
    e = preset_process("circular-mixture")
    assert operation_trace(e, (D_ID, D_ID, D_ID)) == 1
    swap = preset_process("two-channel-loop")
    assert operation_trace(swap, (D_ID, D_NOT)) == 0


def copy_strategy():
    # game output <- wire value, wire back <- game input
    return LocalStrategy.from_function(2, 2, 2, 2, lambda g, i: (i, g))


def test_induced_distribution_identity_chain():
    e = preset_process("identity-chain")
    strategies = tuple(copy_strategy() for _ in range(3))
    for a in [(0, 0, 0), (1, 0, 1), (1, 1, 0)]:
        dist = induced_distribution(e, strategies, a)
        assert dist == {(0, a[0], a[1]): Fraction(1)}


def test_induced_distribution_flags_inconsistent_process():
    e = preset_process("two-channel-loop")
    # forwarding the wire value closes the loop and doubles the weight
    forward = LocalStrategy.from_function(2, 2, 2, 2, lambda g, i: (g, i))
    with pytest.raises(InconsistentProcessError):
        induced_distribution(e, (forward, forward), (0, 0))


def test_environment_ignoring_strategies_factorize():
    e = preset_process("circular-mixture")
    locals_ = []
    for bias_num in (1, 2, 3):
        bias = Fraction(bias_num, 4)
        det0 = LocalStrategy.from_function(2, 2, 2, 2, lambda g, i: (0, g))
        det1 = LocalStrategy.from_function(2, 2, 2, 2, lambda g, i: (1, g))
        locals_.append(LocalStrategy.mixture(((bias, det1), (1 - bias, det0))))
    dist = induced_distribution(e, tuple(locals_), (0, 1, 0))
    for xs, w in dist.items():
        expected = Fraction(1)
        for x, num in zip(xs, (1, 2, 3)):
            p1 = Fraction(num, 4)
            expected *= p1 if x == 1 else 1 - p1
        assert w == expected


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 15), min_size=3, max_size=3), st.data())
def test_strategy_mixtures_keep_unit_total(det_indices, data):
    # stochastic strategies are mixtures of deterministic ones, so the
    # induced weights must still add to exactly 1 on a consistent process
    e = preset_process("circular-mixture")
    strategies = []
    for k in det_indices:
        o_map = [(k >> j) & 1 for j in range(4)]
        det_a = LocalStrategy.from_function(
            2, 2, 2, 2, lambda g, i, m=o_map: ((g + i) % 2, m[2 * g + i])
        )
        det_b = LocalStrategy.from_function(2, 2, 2, 2, lambda g, i: (i, 1 - i))
        w = data.draw(st.fractions(min_value=0, max_value=1, max_denominator=8))
        strategies.append(LocalStrategy.mixture(((w, det_a), (1 - w, det_b))))
    inputs = data.draw(st.tuples(*(st.integers(0, 1) for _ in range(3))))
    dist = induced_distribution(e, tuple(strategies), inputs)
    assert sum(dist.values()) == 1


def test_one_way_behavior_relations():
    rep = infer_relations(preset_behavior("one-way"))
    assert rep.correlated == (("S", "R"),)
    assert rep.relations == (("S", "R"),)
    assert rep.uninfluenced_parties == ("S",)
    assert rep.uninfluenced_party_exists


def test_two_way_behavior_relations():
    rep = infer_relations(preset_behavior("two-way"))
    assert set(rep.correlated) == {("R", "S"), ("S", "R")}
    assert rep.relations == ()
    assert not rep.uninfluenced_party_exists


def test_classify_identity_chain_causal():
    assert classify(preset_process("identity-chain")).causal


def test_classify_circular_mixture_noncausal():
    res = classify(preset_process("circular-mixture"))
    assert not res.causal
    assert res.witness is not None and len(res.witness) == 3
    rep = infer_relations(
        induced_behavior(preset_process("circular-mixture"), res.witness)
    )
    assert not rep.uninfluenced_party_exists


def test_classify_majority_noncausal():
    res = classify(preset_process("majority"))
    assert not res.causal
    assert not res.witness_report.uninfluenced_party_exists


def test_membership_one_way_decomposes_with_zero_first_weight():
    b = preset_behavior("one-way")
    res = two_party_causal_membership(b)
    assert res.member
    assert res.weight_first == 0
    # reconstruction is exact, entry for entry
    total = res.first_term.add(res.second_term)
    assert total.entries == b.table.entries


def test_membership_two_way_excluded():
    assert not two_party_causal_membership(preset_behavior("two-way")).member


def test_membership_first_direction_forced_weight_one():
    # first party broadcasts its input: only "first leads" terms can carry it
    rows = []
    for x in range(2):
        for y in range(2):
            rows.append(
                tuple(
                    Fraction(1, 2) if y == a else Fraction(0)
                    for a in range(2)
                    for b in range(2)
                )
            )
    b = Behavior(("R", "S"), (2, 2), (2, 2), StochasticMatrix(tuple(rows)))
    res = two_party_causal_membership(b)
    assert res.member and res.weight_first == 1


def test_process_file_roundtrip():
    e = preset_process("circular-mixture")
    text = format_process(e)
    again = parse_process(text)
    assert again.parties == e.parties
    assert again.entries == e.entries


def test_process_file_errors_carry_line_numbers():
    with pytest.raises(FileFormatError, match="line 1"):
        parse_process("0 0 | 0 0 : 1/2\n")
    with pytest.raises(FileFormatError, match="line 3"):
        parse_process("party R 2 2\nparty S 2 2\n0 0 | 0 0 0 : 1/2\n")
    with pytest.raises(FileFormatError, match="line 3"):
        parse_process("party R 2 2\nparty S 2 2\n0 0 | 0 0 : 1/x\n")
    with pytest.raises(FileFormatError, match="line 4"):
        parse_process(
            "party R 2 2\nparty S 2 2\n0 0 | 0 0 : 1/2\n0 0 | 0 0 : 1/2\n"
        )
    with pytest.raises(FileFormatError, match="line 2"):
        parse_process("party R 2 2\n0 7 | 0 0 : 1\n")


def test_behavior_file_roundtrip():
    b = preset_behavior("one-way")
    again = parse_behavior(format_behavior(b))
    assert again.table.entries == b.table.entries
    assert again.party_names == b.party_names


def test_permute_parties_consistency_is_invariant():
    e = preset_process("identity-chain")
    p = permute_parties(e, (2, 0, 1))
    assert is_logically_consistent(p)
    assert p.parties[0].name == "T"
    back = permute_parties(p, (1, 2, 0))
    assert back.entries == e.entries


def test_deterministic_op_validation_in_trace():
    e = preset_process("circular-mixture")
    with pytest.raises(ValueError):
        operation_trace(e, (D_ID, D_ID, DeterministicOp((0, 1, 2), 3)))
