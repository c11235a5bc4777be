"""Command line over every verifier and simulator in the package.

Reports are reproducible: the same invocation prints the same bytes except
for the trailing elapsed line, which golden comparisons must drop.  Exact
quantities are rendered as rationals "p/q", floating quantities with 12
significant digits.  Exit codes: 0 when the verdict is true (or the command
is purely informational), 1 when the verdict is false, 2 for usage, file,
or cap problems.

Structured mode prints a single JSON object:

    {"command": ..., "fields": [[key, value], ...],
     "verdict": true | false | null, "elapsed": "0.003"}

All field values are pre-rendered strings, so parsing the object and
dumping it again reproduces the bytes exactly.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import circuits, fixedpoint, games, process, quantum
from .exact import (
    DeterministicOp,
    EnumerationCapExceeded,
    PromiseViolationError,
    format_rational,
)
from .process import FileFormatError


@dataclass
class Report:
    command: str
    fields: list[tuple[str, str]]
    verdict: bool | None
    elapsed: float


def render_text(report: Report) -> str:
    lines = [f"command: {report.command}"]
    for key, value in report.fields:
        lines.append(f"{key}: {value}")
    if report.verdict is not None:
        lines.append(f"verdict: {fmt_bool(report.verdict)}")
    lines.append(f"elapsed: {report.elapsed:.3f}s")
    return "\n".join(lines) + "\n"


def render_structured(report: Report) -> str:
    obj = {
        "command": report.command,
        "fields": [[k, v] for k, v in report.fields],
        "verdict": report.verdict,
        "elapsed": f"{report.elapsed:.3f}",
    }
    return json.dumps(obj, indent=2) + "\n"


def parse_structured_report(text: str) -> dict:
    return json.loads(text)


def fmt_bool(b: bool) -> str:
    return "true" if b else "false"


def fmt_float(x: float) -> str:
    return f"{x:.12g}"


def fmt_tuple(t) -> str:
    items = tuple(t)
    return " ".join(map(str, items)) if items else "-"


def fmt_op(op: DeterministicOp) -> str:
    return ",".join(map(str, op.table))


def fmt_ops(ops) -> str:
    """Each party's map as the image list of 0,1,...; parties joined by '|'."""
    return " | ".join(fmt_op(op) for op in ops)


# ---------------------------------------------------------------------------
# argument loading
# ---------------------------------------------------------------------------


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load(arg: str, preset_fn, parse_fn):
    if arg.startswith("preset:"):
        return preset_fn(arg[len("preset:"):])
    return parse_fn(_read(arg))


def load_process(arg: str) -> process.ClassicalProcess:
    return _load(arg, process.preset_process, process.parse_process)


def load_behavior(arg: str) -> process.Behavior:
    return _load(arg, process.preset_behavior, process.parse_behavior)


def load_game(arg: str) -> games.GameSpec:
    if arg in ("game1", "game2", "game3"):
        return games.builtin_game(arg)
    return games.parse_game(_read(arg))


def load_matrix(arg: str) -> quantum.ProcessMatrix:
    return _load(arg, quantum.preset_matrix, quantum.parse_operator_file)


def load_netlist(arg: str) -> circuits.Circuit:
    if arg.startswith("preset:"):
        return circuits.parse_netlist(circuits.builtin_netlist(arg[len("preset:"):]))
    return circuits.parse_netlist(_read(arg))


def load_decomposition(arg: str) -> fixedpoint.DeterministicDecomposition:
    return _load(arg, fixedpoint.preset_decomposition, fixedpoint.parse_decomposition)


# ---------------------------------------------------------------------------
# handlers; each returns (verdict, fields)
# ---------------------------------------------------------------------------


def cmd_process_validate(ns):
    e = load_process(ns.source)
    fields = [("parties", fmt_tuple(p.name for p in e.parties))]
    nonneg = process.check_nonnegativity(e)
    fields.append(("nonnegative", fmt_bool(nonneg)))
    total = process.check_total_probability(e, cap=ns.cap)
    fields.append(("checked-op-tuples", str(total.checked)))
    if not total.ok:
        fields.append(("witness-ops", fmt_ops(total.ops)))
        fields.append(("witness-trace", format_rational(total.trace)))
    fields.append(("consistent", fmt_bool(nonneg and total.ok)))
    return nonneg and total.ok, fields


def cmd_process_classify(ns):
    e = load_process(ns.source)
    if not process.is_logically_consistent(e, cap=ns.cap):
        raise CommandError("classification needs a logically consistent process")
    result = process.classify(e, cap=ns.cap)
    fields = [("parties", fmt_tuple(p.name for p in e.parties))]
    fields.append(("classification", "Causal" if result.causal else "NonCausal"))
    if not result.causal:
        rep = result.witness_report
        fields.append(
            ("witness-signaling", fmt_tuple(f"{p}->{q}" for p, q in rep.correlated))
        )
        fields.append(("witness-uninfluenced", fmt_tuple(rep.uninfluenced_parties)))
    return result.causal, fields


def cmd_process_fixpoints(ns):
    e = load_process(ns.source)
    try:
        fn = fixedpoint.as_function(e)
    except fixedpoint.NonDeterministicProcessError:
        raise CommandError("fixed-point analysis needs a deterministic process")
    fields = [("parties", fmt_tuple(p.name for p in e.parties))]
    if fn.in_sizes == fn.out_sizes:
        idops = tuple(
            DeterministicOp(tuple(range(s)), s) for s in fn.in_sizes
        )
        pts = fixedpoint.fixed_points(fn, idops)
        fields.append(("identity-op-fixed-points", fmt_tuple(map(fmt_tuple, pts))))
    result = fixedpoint.is_deterministic_extremal(fn, cap=ns.cap)
    fields.append(("extremal", fmt_bool(result.ok)))
    if not result.ok:
        fields.append(("witness-ops", fmt_ops(result.ops)))
        fields.append(("witness-fixed-points", fmt_tuple(map(fmt_tuple, result.points))))
    return result.ok, fields


def cmd_process_decompose_check(ns):
    d = load_decomposition(ns.source)
    result = fixedpoint.verify_unit_fixed_point_average(d, cap=ns.cap)
    fields = [("components", str(len(d.components)))]
    fields.append(
        ("weights", fmt_tuple(format_rational(w) for w, _ in d.components))
    )
    fields.append(("unit-average", fmt_bool(result.ok)))
    if not result.ok:
        fields.append(("witness-ops", fmt_ops(result.ops)))
        fields.append(("witness-average", format_rational(result.average)))
    return result.ok, fields


def cmd_game_bound(ns):
    game = load_game(ns.game)
    result, strategy = games.causal_bound(game, cap=ns.cap)
    fields = [("game", game.name)]
    fields.append(("bound", format_rational(result.success)))
    fields.append(("first-party", game.parties[strategy.first].name))
    for label, value in result.breakdown:
        fields.append((f"condition {label}", format_rational(value)))
    return None, fields


def cmd_game_run(ns):
    game = load_game(ns.game)
    if ns.process == "chain" or ns.strategy == "chain":
        if ns.process != ns.strategy:
            raise CommandError("'chain' must be used for both process and strategy")
        _, strategy = games.causal_bound(game, cap=ns.cap)
        e, locals_ = games.chain_process(game, strategy)
    else:
        e = load_process(ns.process)
        if ns.strategy != "preset":
            raise CommandError("strategy must be 'preset' or 'chain'")
        locals_ = games.preset_strategies(game.name)
    try:
        result = games.play(game, e, locals_)
    except process.InconsistentProcessError as exc:
        raise CommandError(str(exc))
    fields = [("game", game.name)]
    fields.append(("success", format_rational(result.success)))
    for label, value in result.breakdown:
        fields.append((f"condition {label}", format_rational(value)))
    fields.append(("certain-win", fmt_bool(result.success == 1)))
    return result.success == 1, fields


def cmd_relations_infer(ns):
    b = load_behavior(ns.source)
    rep = process.infer_relations(b)
    fields = [("parties", fmt_tuple(rep.parties))]
    fields.append(("signaling", fmt_tuple(f"{p}->{q}" for p, q in rep.correlated)))
    fields.append(("relations", fmt_tuple(f"{p}<{q}" for p, q in rep.relations)))
    fields.append(("uninfluenced", fmt_tuple(rep.uninfluenced_parties)))
    return rep.uninfluenced_party_exists, fields


def cmd_membership_two_party(ns):
    b = load_behavior(ns.source)
    result = process.two_party_causal_membership(b)
    fields = [("parties", fmt_tuple(b.party_names))]
    fields.append(("member", fmt_bool(result.member)))
    if result.member:
        fields.append(("weight-first-leads", format_rational(result.weight_first)))
    return result.member, fields


def cmd_quantum_validate(ns):
    w = load_matrix(ns.source)
    rep = quantum.validate(w, eps=ns.epsilon)
    fields = [("parties", fmt_tuple(p.name for p in w.parties))]
    fields.append(("hermitian", fmt_bool(rep.hermitian)))
    fields.append(("psd", fmt_bool(rep.psd)))
    fields.append(("min-eigenvalue", fmt_float(rep.min_eigenvalue)))
    fields.append(("unit-probability", fmt_bool(rep.unit_probability)))
    fields.append(("max-unit-deviation", fmt_float(rep.max_unit_deviation)))
    return rep.ok, fields


def _outcome_arity(in_dim: int, out_dim: int) -> int:
    # smallest outcome count that admits an isometry, but at least two
    k = 2
    while out_dim * k < in_dim:
        k += 1
    return k


def cmd_quantum_probability(ns):
    w = load_matrix(ns.source)
    rng = np.random.default_rng(ns.seed)
    instruments = [
        quantum.random_instrument(
            rng, p.in_dim, p.out_dim, n_outcomes=_outcome_arity(p.in_dim, p.out_dim)
        )
        for p in w.parties
    ]
    fields = [("parties", fmt_tuple(p.name for p in w.parties))]
    fields.append(("seed", str(ns.seed)))
    try:
        dist = quantum.probability(
            w, instruments, [0] * len(w.parties), eps=ns.epsilon
        )
    except ValueError as exc:
        fields.append(("failure", str(exc)))
        return False, fields
    for xs in sorted(dist):
        fields.append((f"p({fmt_tuple(xs)})", fmt_float(dist[xs])))
    fields.append(("total", fmt_float(sum(dist.values()))))
    return True, fields


def cmd_quantum_ocb(ns):
    value, breakdown = quantum.ocb_game_value(eps=ns.epsilon)
    fields = [("value", fmt_float(value))]
    for label in sorted(breakdown):
        fields.append((label, fmt_float(breakdown[label])))
    fields.append(("causal-bound", "3/4"))
    return value > 0.75, fields


_UNITARIES = {
    "i": quantum.PAULI_I,
    "x": quantum.PAULI_X,
    "y": quantum.PAULI_Y,
    "z": quantum.PAULI_Z,
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.diag([1, 1j]).astype(complex),
    "t": np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex),
}


def cmd_quantum_switch(ns):
    try:
        b = _UNITARIES[ns.box_b.lower()]
        c = _UNITARIES[ns.box_c.lower()]
    except KeyError as exc:
        raise CommandError(f"unknown unitary {exc.args[0]!r}; choose from "
                           + " ".join(sorted(_UNITARIES)))
    fields = [("boxes", f"{ns.box_b.lower()} {ns.box_c.lower()}")]
    try:
        outcome = quantum.commute_test(b, c, eps=ns.epsilon)
    except PromiseViolationError as exc:
        fields.append(("failure", str(exc)))
        return False, fields
    fields.append(("outcome", str(outcome)))
    fields.append(("relation", "commute" if outcome == 0 else "anticommute"))
    return None, fields


def cmd_circuit_check(ns):
    c = load_netlist(ns.source)
    rep = circuits.is_consistent(c, cap=ns.cap)
    fields = []
    for ins in sorted(rep.totals):
        fields.append((f"input {fmt_tuple(ins)}", format_rational(rep.totals[ins])))
    fields.append(("consistent", fmt_bool(rep.consistent)))
    return rep.consistent, fields


def cmd_circuit_run(ns):
    c = load_netlist(ns.source)
    try:
        inputs = tuple(int(v) for v in ns.inputs.split(",")) if ns.inputs else ()
    except ValueError:
        raise CommandError(f"bad --inputs {ns.inputs!r}; expected e.g. 0,1")
    result = circuits.evaluate(c, inputs, cap=ns.cap)
    fields = [("inputs", fmt_tuple(inputs))]
    fields.append(("total", format_rational(result.total)))
    for key in sorted(result.outputs):
        fields.append((f"output {fmt_tuple(key)}", format_rational(result.outputs[key])))
    return result.total == 1, fields


def cmd_circuit_fpsearch(ns):
    if ns.source.isdigit():
        n = int(ns.source)
        if n < 1:
            raise CommandError("alphabet size must be positive")
        rng = random.Random(ns.seed)
        fp = rng.randrange(n)
        images = tuple(
            fp if i == fp else rng.choice([v for v in range(n) if v != i])
            for i in range(n)
        )
        fields = [("map", ",".join(map(str, images))), ("seed", str(ns.seed))]
    else:
        c = load_netlist(ns.source)
        boxes = c.boxes()
        if len(boxes) != 1:
            raise CommandError("netlist must contain exactly one oracle gate")
        images = boxes[0].table()
        fields = [("map", ",".join(map(str, images)))]
    box = circuits.OracleBox(lambda v, t=images: t[v], len(images))
    try:
        found = circuits.fixed_point_search(box)
    except PromiseViolationError as exc:
        fields.append(("failure", str(exc)))
        return False, fields
    fields.append(("value", str(found.value)))
    fields.append(("queries", str(found.query_count)))
    slow = circuits.baseline_search(
        circuits.OracleBox(lambda v, t=images: t[v], len(images))
    )
    fields.append(("baseline-value", str(slow.value)))
    fields.append(("baseline-queries", str(slow.query_count)))
    agree = found.value == slow.value and found.query_count == 1
    fields.append(("agreement", fmt_bool(agree)))
    return agree, fields


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------


class CommandError(Exception):
    """Bad arguments or inputs; maps to exit code 2."""


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--cap", type=int, default=None, metavar="N")
    common.add_argument(
        "--epsilon", type=float, default=quantum.DEFAULT_EPS, metavar="EPS"
    )
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(
        prog="noncausal",
        description="verify and simulate processes without a global causal order",
    )
    top = parser.add_subparsers(dest="group", required=True)

    proc = top.add_parser("process").add_subparsers(dest="sub", required=True)
    p = proc.add_parser("validate", parents=[common])
    p.add_argument("source", help="process file or preset:NAME")
    p.set_defaults(handler=cmd_process_validate)
    p = proc.add_parser("classify", parents=[common])
    p.add_argument("source")
    p.set_defaults(handler=cmd_process_classify)
    p = proc.add_parser("fixpoints", parents=[common])
    p.add_argument("source")
    p.set_defaults(handler=cmd_process_fixpoints)
    p = proc.add_parser("decompose-check", parents=[common])
    p.add_argument("source", help="decomposition file or preset:NAME")
    p.set_defaults(handler=cmd_process_decompose_check)

    game = top.add_parser("game").add_subparsers(dest="sub", required=True)
    p = game.add_parser("run", parents=[common])
    p.add_argument("game", help="game1|game2|game3 or a game file")
    p.add_argument("process", help="process file, preset:NAME, or 'chain'")
    p.add_argument("strategy", help="'preset' or 'chain'")
    p.set_defaults(handler=cmd_game_run)
    p = game.add_parser("bound", parents=[common])
    p.add_argument("game")
    p.set_defaults(handler=cmd_game_bound)

    rel = top.add_parser("relations").add_subparsers(dest="sub", required=True)
    p = rel.add_parser("infer", parents=[common])
    p.add_argument("source", help="behavior file or preset:NAME")
    p.set_defaults(handler=cmd_relations_infer)

    mem = top.add_parser("membership").add_subparsers(dest="sub", required=True)
    p = mem.add_parser("two-party", parents=[common])
    p.add_argument("source")
    p.set_defaults(handler=cmd_membership_two_party)

    q = top.add_parser("quantum").add_subparsers(dest="sub", required=True)
    p = q.add_parser("validate", parents=[common])
    p.add_argument("source", help="operator file or preset:NAME")
    p.set_defaults(handler=cmd_quantum_validate)
    p = q.add_parser("probability", parents=[common])
    p.add_argument("source")
    p.set_defaults(handler=cmd_quantum_probability)
    p = q.add_parser("ocb", parents=[common])
    p.set_defaults(handler=cmd_quantum_ocb)
    p = q.add_parser("switch", parents=[common])
    p.add_argument("box_b", metavar="B")
    p.add_argument("box_c", metavar="C")
    p.set_defaults(handler=cmd_quantum_switch)

    circ = top.add_parser("circuit").add_subparsers(dest="sub", required=True)
    p = circ.add_parser("check", parents=[common])
    p.add_argument("source", help="netlist file or preset:NAME")
    p.set_defaults(handler=cmd_circuit_check)
    p = circ.add_parser("run", parents=[common])
    p.add_argument("source")
    p.add_argument("--inputs", default="", metavar="CSV")
    p.set_defaults(handler=cmd_circuit_run)
    p = circ.add_parser("fpsearch", parents=[common])
    p.add_argument("source", help="netlist with one oracle gate, or a size")
    p.set_defaults(handler=cmd_circuit_fpsearch)

    return parser


def run(argv, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    started = time.perf_counter()
    try:
        verdict, fields = ns.handler(ns)
    except (
        CommandError,
        FileFormatError,
        EnumerationCapExceeded,
        KeyError,
        OSError,
        ValueError,
    ) as exc:
        message = exc.args[0] if exc.args else str(exc)
        print(f"error: {message}", file=err)
        return 2
    elapsed = time.perf_counter() - started
    report = Report(" ".join(argv), fields, verdict, elapsed)
    rendered = (
        render_structured(report) if ns.format == "structured" else render_text(report)
    )
    out.write(rendered)
    return 0 if verdict is None or verdict else 1


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))
