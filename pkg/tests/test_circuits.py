import itertools
import random
from fractions import Fraction

import pytest

from noncausal.circuits import (
    Circuit,
    ConsistencyReport,
    Gate,
    NETLIST_PRESETS,
    OracleBox,
    baseline_search,
    builtin_netlist,
    cnot_gate,
    constant_gate,
    evaluate,
    fig8_circuit,
    fixed_point_search,
    format_netlist,
    identity_gate,
    is_consistent,
    not_gate,
    oracle_gate,
    parse_netlist,
    table_gate,
)
from noncausal.exact import (
    EnumerationCapExceeded,
    Matrix,
    PromiseViolationError,
)
from noncausal.process import FileFormatError

ONE = Fraction(1)
HALF = Fraction(1, 2)


def box_from_table(images):
    return OracleBox(lambda v, t=tuple(images): t[v], len(images))


def scan_fixed_points(images):
    return [i for i, e in enumerate(images) if e == i]


def all_unique_fp_maps(n):
    for images in itertools.product(range(n), repeat=n):
        if len(scan_fixed_points(images)) == 1:
            yield images


# ---------------------------------------------------------------------------
# plain acyclic evaluation
# ---------------------------------------------------------------------------


def test_acyclic_cnot_is_the_usual_gate():
    c = Circuit(
        gates=(cnot_gate("C", 2),),
        wires=(),
        inputs=(("C", 0), ("C", 1)),
        outputs=(("C", 0), ("C", 1)),
    )
    for a, b in itertools.product(range(2), range(2)):
        result = evaluate(c, (a, b))
        assert result.total == ONE
        assert result.outputs == {((a + b) % 2, b): ONE}


def test_acyclic_chain_matches_matrix_product():
    rng = random.Random(7)
    for _ in range(20):
        depth = rng.randrange(1, 5)
        mats = []
        for _ in range(depth):
            cols = []
            for _ in range(2):
                p = Fraction(rng.randrange(0, 5), 4)
                cols.append((min(p, ONE), ONE - min(p, ONE)))
            mats.append(Matrix(tuple(zip(*cols))))
        gates = tuple(
            Gate(f"G{k}", (2,), (2,), matrix=m) for k, m in enumerate(mats)
        )
        wires = tuple(
            ((f"G{k}", 0), (f"G{k + 1}", 0)) for k in range(depth - 1)
        )
        c = Circuit(gates, wires, ((f"G0", 0),), ((f"G{depth - 1}", 0),))
        for a in range(2):
            vec = [ONE if v == a else Fraction(0) for v in range(2)]
            for m in mats:
                vec = [
                    sum(m.entries[r][s] * vec[s] for s in range(2))
                    for r in range(2)
                ]
            result = evaluate(c, (a,))
            assert result.total == ONE
            for x in range(2):
                assert result.outputs.get((x,), Fraction(0)) == vec[x]


def test_evaluate_is_linear_in_the_input():
    c = parse_netlist(builtin_netlist("fig8"))
    res = {a: evaluate(c, (a,)) for a in range(4)}
    keys = set().union(*(r.outputs for r in res.values()))
    for x in keys:
        mixed = sum(
            Fraction(1, 4) * res[a].outputs.get(x, Fraction(0)) for a in range(4)
        )
        direct = [res[a].outputs.get(x, Fraction(0)) for a in range(4)]
        assert mixed == sum(direct) / 4


# ---------------------------------------------------------------------------
# loops
# ---------------------------------------------------------------------------


def test_not_loop_has_no_assignment():
    c = Circuit(
        gates=(not_gate("N", 2),),
        wires=((("N", 0), ("N", 0)),),
        inputs=(),
        outputs=(),
    )
    result = evaluate(c, ())
    assert result.total == 0
    assert result.assignments == {}
    assert not is_consistent(c)


def test_identity_loop_counts_the_alphabet():
    for n in (2, 3, 5):
        c = Circuit(
            gates=(identity_gate("I", n),),
            wires=((("I", 0), ("I", 0)),),
            inputs=(),
            outputs=(),
        )
        report = is_consistent(c)
        assert not report
        assert report.totals[()] == n


def test_uniform_noise_loop_is_consistent():
    noise = table_gate("U", 2, [["1/2", "1/2"], ["1/2", "1/2"]])
    c = Circuit((noise,), ((("U", 0), ("U", 0)),), (), ())
    result = evaluate(c, ())
    assert result.total == ONE
    assert result.assignments == {(0,): HALF, (1,): HALF}
    assert is_consistent(c)


def test_fig8_run_pins_all_wires_to_the_fixed_point():
    box = box_from_table((2, 2, 2, 2))
    c = fig8_circuit(box)
    result = evaluate(c, (0,))
    assert result.total == ONE
    assert result.assignments == {(2, 2, 2): ONE}
    assert result.outputs == {(2,): ONE}


def test_fig8_shifts_output_for_other_inputs():
    box = box_from_table((3, 0, 1, 3))  # unique fixed point 3
    c = fig8_circuit(box)
    for a in range(4):
        result = evaluate(c, (a,))
        assert result.total == ONE
        assert result.outputs == {((a + 3) % 4,): ONE}


def test_fig8_consistent_for_every_unique_fp_box():
    for n in (1, 2, 3, 4):
        for images in all_unique_fp_maps(n):
            assert is_consistent(fig8_circuit(box_from_table(images)))


# ---------------------------------------------------------------------------
# query accounting
# ---------------------------------------------------------------------------


def test_one_run_costs_one_query():
    box = box_from_table((2, 2, 2, 2))
    c = fig8_circuit(box)
    assert box.query_count == 0
    evaluate(c, (0,))
    assert box.query_count == 1
    evaluate(c, (1,))
    assert box.query_count == 2
    is_consistent(c)  # one run per input value
    assert box.query_count == 6


def test_counted_queries_accumulate():
    box = box_from_table((1, 2, 0))
    assert box.query(0) == 1
    assert box.query(0) == 1
    assert box.query_count == 2
    box.resolve(1)  # nature-side, not counted
    assert box.query_count == 2


def test_box_rejects_values_outside_the_alphabet():
    box = OracleBox(lambda v: v + 5, 4)
    with pytest.raises(ValueError):
        box.resolve(1)
    with pytest.raises(ValueError):
        box.resolve(-1)
    with pytest.raises(ValueError):
        box.resolve(4)


# ---------------------------------------------------------------------------
# the two searches
# ---------------------------------------------------------------------------


def test_search_on_a_constant_box():
    result = fixed_point_search(lambda _: 2, 4)
    assert result.value == 2
    assert result.query_count == 1


def test_search_rejects_the_identity_box():
    with pytest.raises(PromiseViolationError):
        fixed_point_search(lambda v: v, 2)


def test_search_rejects_a_fixed_point_free_box():
    with pytest.raises(PromiseViolationError):
        fixed_point_search(lambda v: 1 - v, 2)


def test_search_exhaustive_small_alphabets():
    for n in (1, 2, 3, 4):
        for images in all_unique_fp_maps(n):
            box = box_from_table(images)
            result = fixed_point_search(box)
            assert [result.value] == scan_fixed_points(images)
            assert result.query_count == 1
            assert box.query_count == 1


def test_baseline_worst_case_spends_n_minus_one():
    images = (1, 2, 3, 3)  # fixed point sits last
    result = baseline_search(box_from_table(images))
    assert result.value == 3
    assert result.query_count == 3


def test_baseline_never_queries_the_last_candidate():
    queried = []

    def fn(v):
        queried.append(v)
        return 3

    box = OracleBox(fn, 4)
    result = baseline_search(box)
    assert result.value == 3
    assert 3 not in queried


def test_baseline_two_values():
    for images in ((0, 0), (1, 1)):
        result = baseline_search(box_from_table(images))
        assert [result.value] == scan_fixed_points(images)
        assert result.query_count <= 1


def test_searches_agree_on_sampled_big_maps():
    rng = random.Random(11)
    n = 8
    for _ in range(60):
        fp = rng.randrange(n)
        images = tuple(
            fp if i == fp else rng.choice([v for v in range(n) if v != i])
            for i in range(n)
        )
        assert scan_fixed_points(images) == [fp]
        fast = fixed_point_search(box_from_table(images))
        slow = baseline_search(box_from_table(images))
        assert fast.value == slow.value == fp
        assert fast.query_count == 1
        assert slow.query_count <= n - 1


# ---------------------------------------------------------------------------
# validation and caps
# ---------------------------------------------------------------------------


def test_circuit_rejects_dangling_and_doubled_ports():
    with pytest.raises(ValueError, match="unconnected"):
        Circuit((identity_gate("I", 2),), (), (("I", 0),), ())
    with pytest.raises(ValueError, match="used twice"):
        Circuit(
            (identity_gate("I", 2),),
            ((("I", 0), ("I", 0)),),
            (("I", 0),),
            (),
        )
    with pytest.raises(ValueError, match="different alphabets"):
        Circuit(
            (identity_gate("I", 2), identity_gate("J", 3)),
            ((("I", 0), ("J", 0)), (("J", 0), ("I", 0))),
            (),
            (),
        )
    with pytest.raises(ValueError, match="duplicate"):
        Circuit(
            (identity_gate("I", 2), identity_gate("I", 2)),
            ((("I", 0), ("I", 0)),),
            (),
            (),
        )
    with pytest.raises(ValueError, match="names no gate"):
        Circuit((identity_gate("I", 2),), ((("I", 0), ("J", 0)),), (("I", 0),), ())


def test_gate_validation():
    with pytest.raises(ValueError, match="column-stochastic"):
        Gate("G", (2,), (2,), matrix=Matrix.from_rows([[1, 1], [1, 0]]))
    with pytest.raises(ValueError, match="shape"):
        Gate("G", (2,), (3,), matrix=Matrix.identity(2))
    with pytest.raises(ValueError, match="exactly one"):
        Gate("G", (2,), (2,))
    with pytest.raises(ValueError, match="one port per side"):
        Gate("G", (2, 2), (2,), box=OracleBox(lambda v: v, 2))
    with pytest.raises(ValueError, match="dot-free"):
        identity_gate("a.b", 2)
    with pytest.raises(ValueError):
        constant_gate("K", 3, 3)


def test_cap_guards_the_assignment_space():
    box = box_from_table(tuple(0 for _ in range(8)))
    c = fig8_circuit(box)
    with pytest.raises(EnumerationCapExceeded):
        evaluate(c, (0,), cap=100)
    with pytest.raises(EnumerationCapExceeded):
        is_consistent(c, cap=100)


def test_evaluate_rejects_bad_inputs():
    c = fig8_circuit(box_from_table((2, 2, 2, 2)))
    with pytest.raises(ValueError):
        evaluate(c, ())
    with pytest.raises(ValueError):
        evaluate(c, (4,))


# ---------------------------------------------------------------------------
# netlists
# ---------------------------------------------------------------------------


def test_builtin_netlists_parse_and_classify():
    fig8 = parse_netlist(builtin_netlist("fig8"))
    assert is_consistent(fig8)
    assert not is_consistent(parse_netlist(builtin_netlist("not-loop")))
    assert not is_consistent(parse_netlist(builtin_netlist("identity-loop")))
    with pytest.raises(KeyError):
        builtin_netlist("moebius")


def test_builtin_fig8_finds_its_fixed_point():
    c = parse_netlist(builtin_netlist("fig8"))
    result = evaluate(c, (0,))
    assert result.outputs == {(2,): ONE}
    assert c.gate("B").box.query_count == 1


def test_netlist_roundtrip():
    text = (
        "gate C cnot 3\n"
        "gate B oracle 3 : 1 1 1\n"
        "gate U table 3 : 1/2 0 0 ; 1/2 1 0 ; 0 0 1\n"
        "gate I identity 3\n"
        "wire C.out1 -> B.in0\n"
        "wire B.out0 -> U.in0\n"
        "wire U.out0 -> I.in0\n"
        "wire I.out0 -> C.in1\n"
        "input C.in0\n"
        "output C.out0\n"
    )
    c = parse_netlist(text)
    again = parse_netlist(format_netlist(c))
    assert format_netlist(again) == format_netlist(c)
    for a in range(3):
        r1, r2 = evaluate(c, (a,)), evaluate(again, (a,))
        assert r1.total == r2.total
        assert r1.outputs == r2.outputs


def test_netlist_constant_gate():
    c = parse_netlist(
        "gate K constant 4 2\n"
        "gate I identity 4\n"
        "wire K.out0 -> I.in0\n"
        "input K.in0\n"
        "output I.out0\n"
    )
    assert evaluate(c, (1,)).outputs == {(2,): ONE}


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("gate C cnot two\n", "line 1"),
        ("flux C cnot 2\n", "line 1"),
        ("gate C cnot 2\nwire C.out0 C.in0\n", "line 2"),
        ("gate B oracle 2 : 0 5\n", "line 1"),
        ("gate T table 2 : 1 0\n", "line 1"),
        ("gate C cnot 2\nwire C.bad0 -> C.in0\n", "line 2"),
        ("", "no gate"),
    ],
)
def test_netlist_errors_carry_line_numbers(text, fragment):
    with pytest.raises(FileFormatError, match=fragment):
        parse_netlist(text)


def test_netlist_wiring_errors_become_file_errors():
    text = "gate I identity 2\ninput I.in0\n"  # out port dangling
    with pytest.raises(FileFormatError, match="unconnected"):
        parse_netlist(text)


def test_preset_names_are_stable():
    assert NETLIST_PRESETS == ("fig8", "not-loop", "identity-loop")
    for name in NETLIST_PRESETS:
        parse_netlist(builtin_netlist(name))
