import io
import json
import math

import pytest

from noncausal import cli
from noncausal.process import format_process, preset_process


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def body(text):
    """Report lines with the timing line dropped, for golden comparison."""
    return [l for l in text.splitlines() if not l.startswith("elapsed:")]


def fields_of(structured_text):
    obj = json.loads(structured_text)
    return dict(tuple(pair) for pair in obj["fields"]), obj


# ---------------------------------------------------------------------------
# spec'd examples
# ---------------------------------------------------------------------------


def test_validate_majority_preset():
    code, out, _ = run_cli("process", "validate", "preset:majority")
    assert code == 0
    assert "verdict: true" in out


def test_game2_bound_prints_five_sixths():
    code, out, _ = run_cli("game", "bound", "game2")
    assert code == 0
    assert "bound: 5/6" in out


def test_ocb_value_close_to_quantum_maximum():
    code, out, _ = run_cli("quantum", "ocb", "--format", "structured")
    assert code == 0
    fields, obj = fields_of(out)
    assert obj["verdict"] is True
    assert math.isclose(
        float(fields["value"]), (2 + math.sqrt(2)) / 4, abs_tol=1e-9
    )
    assert fields["causal-bound"] == "3/4"


# ---------------------------------------------------------------------------
# exit codes across the preset matrix
# ---------------------------------------------------------------------------

MATRIX = [
    (("process", "validate", "preset:circular-mixture"), 0),
    (("process", "validate", "preset:majority"), 0),
    (("process", "validate", "preset:identity-chain"), 0),
    (("process", "validate", "preset:two-channel-loop"), 1),
    (("process", "validate", "preset:perturbed-mixture"), 1),
    (("process", "classify", "preset:circular-mixture"), 1),
    (("process", "classify", "preset:majority"), 1),
    (("process", "classify", "preset:identity-chain"), 0),
    (("process", "fixpoints", "preset:majority"), 0),
    (("process", "decompose-check", "preset:circular-mixture"), 0),
    (("relations", "infer", "preset:one-way"), 0),
    (("relations", "infer", "preset:two-way"), 1),
    (("membership", "two-party", "preset:one-way"), 0),
    (("membership", "two-party", "preset:two-way"), 1),
    (("quantum", "validate", "preset:w-state"), 0),
    (("quantum", "validate", "preset:w-channel"), 0),
    (("quantum", "validate", "preset:w-superposed"), 0),
    (("quantum", "validate", "preset:w-ocb"), 0),
    (("quantum", "validate", "preset:w-two-channels"), 1),
    (("circuit", "check", "preset:fig8"), 0),
    (("circuit", "check", "preset:not-loop"), 1),
    (("circuit", "check", "preset:identity-loop"), 1),
]


@pytest.mark.parametrize("argv, expected", MATRIX, ids=[" ".join(a) for a, _ in MATRIX])
def test_exit_codes_match_verdicts(argv, expected):
    code, out, _ = run_cli(*argv)
    assert code == expected
    want = "verdict: true" if expected == 0 else "verdict: false"
    assert want in out


# ---------------------------------------------------------------------------
# determinism and the structured format
# ---------------------------------------------------------------------------


def test_reports_are_reproducible_modulo_timing():
    for argv in (
        ("process", "classify", "preset:circular-mixture"),
        ("game", "bound", "game3"),
        ("quantum", "probability", "preset:w-state", "--seed", "9"),
        ("circuit", "fpsearch", "6", "--seed", "2"),
    ):
        a = run_cli(*argv)
        b = run_cli(*argv)
        assert a[0] == b[0]
        assert body(a[1]) == body(b[1])


def test_structured_output_roundtrips_byte_for_byte():
    for argv in (
        ("game", "bound", "game1", "--format", "structured"),
        ("circuit", "check", "preset:fig8", "--format", "structured"),
    ):
        _, out, _ = run_cli(*argv)
        parsed = cli.parse_structured_report(out)
        assert json.dumps(parsed, indent=2) + "\n" == out


def test_structured_fields_match_text_fields():
    _, text, _ = run_cli("membership", "two-party", "preset:one-way")
    _, struct, _ = run_cli(
        "membership", "two-party", "preset:one-way", "--format", "structured"
    )
    fields, obj = fields_of(struct)
    for key, value in fields.items():
        assert f"{key}: {value}" in text
    assert obj["verdict"] is True
    assert obj["command"].startswith("membership two-party")


# ---------------------------------------------------------------------------
# games and circuits through the CLI
# ---------------------------------------------------------------------------


def test_perfect_violation_runs():
    code, out, _ = run_cli("game", "run", "game2", "preset:circular-mixture", "preset")
    assert code == 0
    assert "success: 1" in out
    code, out, _ = run_cli("game", "run", "game3", "preset:majority", "preset")
    assert code == 0
    assert "success: 1" in out


def test_chain_realizes_the_bound_but_not_certainty():
    code, out, _ = run_cli("game", "run", "game1", "chain", "chain")
    assert code == 1
    assert "success: 3/4" in out
    assert "certain-win: false" in out


def test_fpsearch_from_netlist_preset():
    code, out, _ = run_cli("circuit", "fpsearch", "preset:fig8")
    assert code == 0
    assert "value: 2" in out
    assert "queries: 1" in out
    assert "agreement: true" in out


def test_fpsearch_generated_instance_is_seed_stable():
    code, out, _ = run_cli("circuit", "fpsearch", "8", "--seed", "3")
    assert code == 0
    assert "map: 5,5,1,3,2,4,3,5" in out
    assert "queries: 1" in out


def test_circuit_run_reports_distribution():
    code, out, _ = run_cli("circuit", "run", "preset:fig8", "--inputs", "1")
    assert code == 0
    assert "total: 1" in out
    assert "output 3: 1" in out


def test_switch_outcomes():
    code, out, _ = run_cli("quantum", "switch", "z", "z")
    assert code == 0
    assert "relation: commute" in out
    code, out, _ = run_cli("quantum", "switch", "x", "z")
    assert code == 0
    assert "relation: anticommute" in out


def test_switch_promise_violation_is_a_false_verdict():
    code, out, _ = run_cli("quantum", "switch", "z", "h")
    assert code == 1
    assert "failure" in out


# ---------------------------------------------------------------------------
# files and failure modes
# ---------------------------------------------------------------------------


def test_validate_accepts_a_file(tmp_path):
    path = tmp_path / "proc.txt"
    path.write_text(format_process(preset_process("identity-chain")))
    code, out, _ = run_cli("process", "validate", str(path))
    assert code == 0
    assert "verdict: true" in out


def test_malformed_file_exits_two_with_location(tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("party R 2 2\n0 0 | 0 : nope\n")
    code, _, err = run_cli("process", "validate", str(path))
    assert code == 2
    assert "line 2" in err


def test_usage_errors_exit_two():
    assert run_cli()[0] == 2
    assert run_cli("bogus")[0] == 2
    assert run_cli("process", "validate", "preset:no-such")[0] == 2
    assert run_cli("process", "validate", "/no/such/file")[0] == 2
    assert run_cli("circuit", "run", "preset:fig8", "--inputs", "x")[0] == 2
    assert run_cli("game", "run", "game2", "chain", "preset")[0] == 2
    assert run_cli("quantum", "switch", "x", "q")[0] == 2


def test_cap_failures_exit_two():
    code, _, err = run_cli("process", "validate", "preset:majority", "--cap", "10")
    assert code == 2
    assert "cap" in err


def test_classify_refuses_inconsistent_input():
    code, _, err = run_cli("process", "classify", "preset:two-channel-loop")
    assert code == 2
    assert "consistent" in err


def test_help_exits_zero():
    assert run_cli("--help")[0] == 0
