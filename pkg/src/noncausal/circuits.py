"""Circuits with cyclic wiring, run by exact assignment enumeration.

Gates are column-stochastic maps on finite alphabets and wires may form
loops.  The weight of a global wire assignment is the product of gate
conditionals; a circuit is logically consistent when those weights add to
one for every choice of circuit input.  Nothing here normalizes: a total
other than one is reported as such, since rescaling would break linearity
in the inputs.

Black boxes carry a query counter.  Running a circuit traverses each box
once, whatever the enumeration does internally, so one evaluation costs one
query.  That accounting is what lets the looped-wire construction in
fig8_circuit find a unique fixed point of a box with a single query, where
any sequential strategy needs up to n - 1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .exact import (
    ONE,
    ZERO,
    Matrix,
    PromiseViolationError,
    check_cap,
    flatten_index,
    format_rational,
    product,
)
from .process import FileFormatError

Outcome = tuple[int, ...]
Port = tuple[str, int]  # (gate name, port index)
Wire = tuple[Port, Port]  # output port -> input port


class OracleBox:
    """Counted access to a hidden map on range(n).

    query() is the costed interface an algorithm may use.  resolve() is the
    box acting inside a running circuit; the engine calls it during weight
    enumeration and charges the counter once per run instead, in
    evaluate().  Algorithm code must not call resolve().
    """

    def __init__(self, fn: Callable[[int], int], size: int):
        if size < 1:
            raise ValueError("box alphabet must be positive")
        self.size = size
        self._fn = fn
        self.query_count = 0

    def query(self, value: int) -> int:
        self.query_count += 1
        return self.resolve(value)

    def resolve(self, value: int) -> int:
        if not 0 <= value < self.size:
            raise ValueError(f"box input {value} out of range")
        image = self._fn(value)
        if not 0 <= image < self.size:
            raise ValueError(f"box returned {image}, outside its alphabet")
        return image

    def table(self) -> tuple[int, ...]:
        """Full transition table, resolved nature-side (not counted)."""
        return tuple(self.resolve(i) for i in range(self.size))


@dataclass(frozen=True)
class Gate:
    """One circuit element: a stochastic matrix or a counted black box.

    Matrix convention matches the rest of the toolkit: entry [r][c] is
    P(outputs = unflatten(r) | inputs = unflatten(c)) with the leftmost
    port most significant.
    """

    name: str
    in_sizes: tuple[int, ...]
    out_sizes: tuple[int, ...]
    matrix: Matrix | None = None
    box: OracleBox | None = None

    def __post_init__(self):
        if not self.name or "." in self.name:
            raise ValueError("gate names must be nonempty and dot-free")
        if any(s < 1 for s in self.in_sizes + self.out_sizes):
            raise ValueError("port alphabets must be positive")
        if (self.matrix is None) == (self.box is None):
            raise ValueError("gate needs exactly one of matrix, box")
        if self.matrix is not None:
            if self.matrix.rows != product(self.out_sizes) or self.matrix.cols != product(self.in_sizes):
                raise ValueError(f"gate {self.name}: matrix shape does not match ports")
            if not self.matrix.is_column_stochastic():
                raise ValueError(f"gate {self.name}: matrix is not column-stochastic")
        else:
            if self.in_sizes != (self.box.size,) or self.out_sizes != (self.box.size,):
                raise ValueError(f"gate {self.name}: a box gate has one port per side")

    def weight(self, ins: Outcome, outs: Outcome) -> Fraction:
        if self.box is not None:
            return ONE if outs[0] == self.box.resolve(ins[0]) else ZERO
        r = flatten_index(outs, self.out_sizes)
        c = flatten_index(ins, self.in_sizes)
        return self.matrix.entries[r][c]


def identity_gate(name: str, n: int) -> Gate:
    return Gate(name, (n,), (n,), matrix=Matrix.identity(n))


def not_gate(name: str, n: int = 2) -> Gate:
    """Cyclic successor, the mod-n reading of a NOT."""
    rows = [[ONE if r == (c + 1) % n else ZERO for c in range(n)] for r in range(n)]
    return Gate(name, (n,), (n,), matrix=Matrix(tuple(map(tuple, rows))))


def constant_gate(name: str, n: int, k: int) -> Gate:
    if not 0 <= k < n:
        raise ValueError("constant outside the alphabet")
    rows = [[ONE if r == k else ZERO for _ in range(n)] for r in range(n)]
    return Gate(name, (n,), (n,), matrix=Matrix(tuple(map(tuple, rows))))


def cnot_gate(name: str, n: int = 2) -> Gate:
    """(i, j) -> (i + j mod n, j); the second port rides through."""
    size = n * n
    rows = [[ZERO] * size for _ in range(size)]
    for i in range(n):
        for j in range(n):
            r = flatten_index(((i + j) % n, j), (n, n))
            c = flatten_index((i, j), (n, n))
            rows[r][c] = ONE
    return Gate(name, (n, n), (n, n), matrix=Matrix(tuple(map(tuple, rows))))


def table_gate(name: str, n: int, rows: Sequence[Sequence[int | str | Fraction]]) -> Gate:
    return Gate(name, (n,), (n,), matrix=Matrix.from_rows(rows))


def oracle_gate(name: str, box: OracleBox) -> Gate:
    return Gate(name, (box.size,), (box.size,), box=box)


@dataclass(frozen=True)
class Circuit:
    """Gates plus wiring; cycles are allowed.

    Every gate port is used exactly once: an input port is fed by one wire
    or declared in inputs, an output port feeds one wire or is declared in
    outputs.  The dangling ports are the circuit's interface.
    """

    gates: tuple[Gate, ...]
    wires: tuple[Wire, ...]
    inputs: tuple[Port, ...]
    outputs: tuple[Port, ...]

    def __post_init__(self):
        names = [g.name for g in self.gates]
        if len(set(names)) != len(names):
            raise ValueError("duplicate gate names")
        by_name = {g.name: g for g in self.gates}
        in_seen: set[Port] = set()
        out_seen: set[Port] = set()

        def check(port: Port, side: str, seen: set[Port]):
            gname, idx = port
            gate = by_name.get(gname)
            if gate is None:
                raise ValueError(f"port {gname}.{side}{idx} names no gate")
            sizes = gate.in_sizes if side == "in" else gate.out_sizes
            if not 0 <= idx < len(sizes):
                raise ValueError(f"port {gname}.{side}{idx} out of range")
            if port in seen:
                raise ValueError(f"port {gname}.{side}{idx} used twice")
            seen.add(port)
            return sizes[idx]

        for src, dst in self.wires:
            a = check(src, "out", out_seen)
            b = check(dst, "in", in_seen)
            if a != b:
                raise ValueError(f"wire {src} -> {dst} joins different alphabets")
        for port in self.inputs:
            check(port, "in", in_seen)
        for port in self.outputs:
            check(port, "out", out_seen)
        for gate in self.gates:
            for idx in range(len(gate.in_sizes)):
                if (gate.name, idx) not in in_seen:
                    raise ValueError(f"port {gate.name}.in{idx} is unconnected")
            for idx in range(len(gate.out_sizes)):
                if (gate.name, idx) not in out_seen:
                    raise ValueError(f"port {gate.name}.out{idx} is unconnected")

    def gate(self, name: str) -> Gate:
        for g in self.gates:
            if g.name == name:
                return g
        raise KeyError(name)

    def _port_size(self, port: Port, side: str) -> int:
        gate = self.gate(port[0])
        return (gate.in_sizes if side == "in" else gate.out_sizes)[port[1]]

    @property
    def input_sizes(self) -> tuple[int, ...]:
        return tuple(self._port_size(p, "in") for p in self.inputs)

    @property
    def output_sizes(self) -> tuple[int, ...]:
        return tuple(self._port_size(p, "out") for p in self.outputs)

    @property
    def wire_sizes(self) -> tuple[int, ...]:
        return tuple(self._port_size(src, "out") for src, _ in self.wires)

    def boxes(self) -> tuple[OracleBox, ...]:
        return tuple(g.box for g in self.gates if g.box is not None)


@dataclass(frozen=True)
class EvaluationResult:
    """Weights for one circuit input.

    assignments is keyed by the values on circuit.wires followed by the
    values on circuit.outputs; zero-weight keys are dropped.  outputs is
    the marginal on the open output ports.  total is the sum of all
    weights; only a consistent circuit reaches exactly one.
    """

    inputs: Outcome
    total: Fraction
    outputs: dict[Outcome, Fraction]
    assignments: dict[Outcome, Fraction]


def evaluate(circuit: Circuit, inputs: Outcome, cap: int | None = None) -> EvaluationResult:
    """Weigh every wire assignment under the given circuit inputs.

    Each black box in the circuit is charged exactly one query per call:
    a run traverses the box once, however many rows the enumeration below
    inspects through the nature-side interface.
    """
    insizes = circuit.input_sizes
    if len(inputs) != len(insizes) or any(
        not 0 <= v < s for v, s in zip(inputs, insizes)
    ):
        raise ValueError(f"inputs {inputs} do not fit alphabets {insizes}")
    wire_sizes = circuit.wire_sizes
    out_sizes = circuit.output_sizes
    check_cap(product(wire_sizes) * product(out_sizes), cap)

    # Where each gate port reads its value from: circuit input k, wire w,
    # or open output o.  Positions index into the assignment tuple.
    nwires = len(circuit.wires)
    source: dict[Port, tuple[str, int]] = {}
    sink: dict[Port, tuple[str, int]] = {}
    for w, (src, dst) in enumerate(circuit.wires):
        sink[src] = ("wire", w)
        source[dst] = ("wire", w)
    for k, port in enumerate(circuit.inputs):
        source[port] = ("given", k)
    for o, port in enumerate(circuit.outputs):
        sink[port] = ("free", nwires + o)

    plans = []
    for gate in circuit.gates:
        ins = tuple(source[(gate.name, i)] for i in range(len(gate.in_sizes)))
        outs = tuple(sink[(gate.name, i)] for i in range(len(gate.out_sizes)))
        plans.append((gate, ins, outs))

    for box in circuit.boxes():
        box.query_count += 1

    def pick(slot: tuple[str, int], free: Outcome) -> int:
        kind, idx = slot
        return inputs[idx] if kind == "given" else free[idx]

    total = ZERO
    assignments: dict[Outcome, Fraction] = {}
    outputs: dict[Outcome, Fraction] = {}
    for free in itertools.product(*(range(s) for s in wire_sizes + out_sizes)):
        weight = ONE
        for gate, ins, outs in plans:
            weight *= gate.weight(
                tuple(pick(s, free) for s in ins),
                tuple(pick(s, free) for s in outs),
            )
            if weight == 0:
                break
        if weight == 0:
            continue
        total += weight
        assignments[free] = weight
        key = free[nwires:]
        outputs[key] = outputs.get(key, ZERO) + weight
    return EvaluationResult(tuple(inputs), total, outputs, assignments)


@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    totals: dict[Outcome, Fraction]  # per circuit input

    def __bool__(self) -> bool:
        return self.consistent

    def describe(self) -> str:
        lines = [f"consistent: {self.consistent}"]
        for ins, tot in sorted(self.totals.items()):
            shown = " ".join(map(str, ins)) if ins else "-"
            lines.append(f"input {shown}: total {format_rational(tot)}")
        return "\n".join(lines)


def is_consistent(circuit: Circuit, cap: int | None = None) -> ConsistencyReport:
    """Total weight must be exactly one for every circuit input."""
    insizes = circuit.input_sizes
    space = product(insizes) * product(circuit.wire_sizes) * product(circuit.output_sizes)
    check_cap(space, cap)
    totals: dict[Outcome, Fraction] = {}
    ok = True
    for ins in itertools.product(*(range(s) for s in insizes)):
        total = evaluate(circuit, ins, cap=cap).total
        totals[ins] = total
        if total != 1:
            ok = False
    return ConsistencyReport(ok, totals)


# ---------------------------------------------------------------------------
# fixed-point search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    value: int
    query_count: int


def _as_box(fn: Callable[[int], int] | OracleBox, size: int | None) -> OracleBox:
    if isinstance(fn, OracleBox):
        return fn
    if size is None:
        raise ValueError("a bare callable needs an explicit alphabet size")
    return OracleBox(fn, size)


def fig8_circuit(box: OracleBox) -> Circuit:
    """Adder looped through a box: the loop wire settles on a fixed point.

    The adder C takes the circuit input a and the box output b and emits
    x = a + b mod n on the open output, while b itself rides through and
    feeds back into the box.  So the loop forces y = b and b = box(y),
    and with a = 0 the open output is exactly the fixed point.
    """
    n = box.size
    c = cnot_gate("C", n)
    b = oracle_gate("B", box)
    return Circuit(
        gates=(c, b),
        wires=((("C", 1), ("B", 0)), (("B", 0), ("C", 1))),
        inputs=(("C", 0),),
        outputs=(("C", 0),),
    )


def fixed_point_search(
    fn: Callable[[int], int] | OracleBox, size: int | None = None
) -> SearchResult:
    """Find the promised unique fixed point with a single box query.

    Runs fig8_circuit once at a = 0 and reads the open output.  A box with
    any other number of fixed points makes the run's total weight differ
    from one; that is reported as a promise violation and no value is
    invented.
    """
    box = _as_box(fn, size)
    before = box.query_count
    result = evaluate(fig8_circuit(box), (0,))
    spent = box.query_count - before
    if result.total != 1:
        raise PromiseViolationError(
            f"loop weight {format_rational(result.total)} says the box has "
            "some number of fixed points other than one"
        )
    ((value,),) = result.outputs  # total one and deterministic: a single key
    return SearchResult(value, spent)


def baseline_search(
    fn: Callable[[int], int] | OracleBox, size: int | None = None
) -> SearchResult:
    """Sequential elimination under the same unique-fixed-point promise.

    Queries 0, 1, ... and stops at the first match; if the first n - 1
    candidates all miss, the promise pins the last one without querying
    it.  Costs at most n - 1 queries, and exactly that on maps whose fixed
    point is one of the last two values.  A promise-breaking box with no
    fixed point at all is indistinguishable inside this budget, so the
    returned candidate is then wrong; the promise is the caller's to keep.
    """
    box = _as_box(fn, size)
    before = box.query_count
    for i in range(box.size - 1):
        if box.query(i) == i:
            return SearchResult(i, box.query_count - before)
    return SearchResult(box.size - 1, box.query_count - before)


# ---------------------------------------------------------------------------
# netlist files
#
#     gate NAME KIND N [K] [: body]
#     wire NAME.outJ -> NAME.inK
#     input NAME.inK
#     output NAME.outJ
# KIND is identity | not | cnot | constant | table | oracle.  constant takes
# the emitted value K.  table lists n rows of n rationals separated by ';'.
# oracle lists the n image values; parsing wraps them in a fresh counted box.
# ---------------------------------------------------------------------------

NETLIST_PRESETS = ("fig8", "not-loop", "identity-loop")


def _parse_port(token: str, side: str, lineno: int) -> Port:
    name, dot, rest = token.partition(".")
    if not dot or not rest.startswith(side) or not rest[len(side):].isdigit():
        raise FileFormatError(
            f"line {lineno}: expected a port like NAME.{side}0, got {token!r}"
        )
    return (name, int(rest[len(side):]))


def parse_netlist(text: str) -> Circuit:
    gates: list[Gate] = []
    wires: list[Wire] = []
    inputs: list[Port] = []
    outputs: list[Port] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split(None, 1)
        body = rest[0] if rest else ""
        if head == "gate":
            decl, colon, extra = body.partition(":")
            parts = decl.split()
            if len(parts) < 3:
                raise FileFormatError(f"line {lineno}: expected 'gate NAME KIND N'")
            name, kind = parts[0], parts[1]
            try:
                n = int(parts[2])
            except ValueError:
                raise FileFormatError(f"line {lineno}: alphabet must be an integer")
            if n < 1:
                raise FileFormatError(f"line {lineno}: alphabet must be positive")
            try:
                if kind == "identity" and len(parts) == 3:
                    gates.append(identity_gate(name, n))
                elif kind == "not" and len(parts) == 3:
                    gates.append(not_gate(name, n))
                elif kind == "cnot" and len(parts) == 3:
                    gates.append(cnot_gate(name, n))
                elif kind == "constant" and len(parts) == 4:
                    gates.append(constant_gate(name, n, int(parts[3])))
                elif kind == "table" and len(parts) == 3 and colon:
                    rows = [row.split() for row in extra.split(";")]
                    if len(rows) != n or any(len(r) != n for r in rows):
                        raise ValueError(f"table needs {n} rows of {n} entries")
                    gates.append(table_gate(name, n, rows))
                elif kind == "oracle" and len(parts) == 3 and colon:
                    images = tuple(int(v) for v in extra.split())
                    if len(images) != n:
                        raise ValueError(f"oracle needs {n} image values")
                    if any(not 0 <= v < n for v in images):
                        raise ValueError("oracle image outside the alphabet")
                    box = OracleBox(lambda v, t=images: t[v], n)
                    gates.append(oracle_gate(name, box))
                else:
                    raise ValueError(f"bad declaration for kind {kind!r}")
            except (ValueError, ZeroDivisionError) as exc:
                raise FileFormatError(f"line {lineno}: {exc}")
        elif head == "wire":
            src_tok, arrow, dst_tok = body.partition("->")
            if not arrow:
                raise FileFormatError(f"line {lineno}: expected 'wire A.outJ -> B.inK'")
            wires.append(
                (
                    _parse_port(src_tok.strip(), "out", lineno),
                    _parse_port(dst_tok.strip(), "in", lineno),
                )
            )
        elif head == "input":
            inputs.append(_parse_port(body.strip(), "in", lineno))
        elif head == "output":
            outputs.append(_parse_port(body.strip(), "out", lineno))
        else:
            raise FileFormatError(f"line {lineno}: unknown directive {head!r}")
    if not gates:
        raise FileFormatError("line 1: no gate declarations found")
    try:
        return Circuit(tuple(gates), tuple(wires), tuple(inputs), tuple(outputs))
    except ValueError as exc:
        raise FileFormatError(str(exc))


def format_netlist(circuit: Circuit) -> str:
    """Serialize a circuit; box gates are written with their full table."""
    lines = []
    for gate in circuit.gates:
        if gate.box is not None:
            images = " ".join(map(str, gate.box.table()))
            lines.append(f"gate {gate.name} oracle {gate.box.size} : {images}")
            continue
        if len(gate.in_sizes) == 1 and gate.in_sizes == gate.out_sizes:
            n = gate.in_sizes[0]
            if gate.matrix.entries == Matrix.identity(n).entries:
                lines.append(f"gate {gate.name} identity {n}")
            else:
                rows = " ; ".join(
                    " ".join(format_rational(x) for x in row)
                    for row in gate.matrix.entries
                )
                lines.append(f"gate {gate.name} table {n} : {rows}")
        elif (
            len(gate.in_sizes) == 2
            and gate.in_sizes == gate.out_sizes
            and gate.matrix.entries == cnot_gate("_", gate.in_sizes[0]).matrix.entries
        ):
            lines.append(f"gate {gate.name} cnot {gate.in_sizes[0]}")
        else:
            raise ValueError(f"gate {gate.name} has no netlist form")
    for (sg, sp), (dg, dp) in circuit.wires:
        lines.append(f"wire {sg}.out{sp} -> {dg}.in{dp}")
    for g, p in circuit.inputs:
        lines.append(f"input {g}.in{p}")
    for g, p in circuit.outputs:
        lines.append(f"output {g}.out{p}")
    return "\n".join(lines) + "\n"


def builtin_netlist(name: str) -> str:
    """Small reference netlists used in tests and the command line."""
    if name == "fig8":
        return (
            "# fixed-point finder: loop the adder through the box\n"
            "gate C cnot 4\n"
            "gate B oracle 4 : 2 2 2 2\n"
            "wire C.out1 -> B.in0\n"
            "wire B.out0 -> C.in1\n"
            "input C.in0\n"
            "output C.out0\n"
        )
    if name == "not-loop":
        return (
            "# successor fed into itself: no assignment survives\n"
            "gate N not 2\n"
            "wire N.out0 -> N.in0\n"
        )
    if name == "identity-loop":
        return (
            "# identity fed into itself: every value survives\n"
            "gate I identity 2\n"
            "wire I.out0 -> I.in0\n"
        )
    raise KeyError(f"unknown netlist preset {name!r}; choose from {NETLIST_PRESETS}")
