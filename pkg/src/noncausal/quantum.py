"""Process matrices over small labeled Hilbert spaces.

The classical modules decide everything exactly; here amplitudes bring in
sqrt(2), so operators are complex float matrices compared against a
tolerance.  A process matrix W pairs with one instrument per party to give
joint outcome probabilities P(x1..xn | a1..an) = Tr((C_1 ⊗ ... ⊗ C_n) W),
where C_p is the party's channel representation for (input, outcome).

Channel representation convention, fixed once and round-trip tested: a map
M with Kraus operators {K} on in-dim d becomes

    C(M) = (sum_K (1 ⊗ K) G (1 ⊗ K)^dagger)^T,   G = sum_jk |jj><kk|,

an operator on in ⊗ out.  Under this convention M is trace-preserving iff
the partial trace of C over the out factor is the in-space identity, and a
measure-then-prepare map becomes (POVM element) ⊗ (prepared state)^T.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exact import PromiseViolationError

DEFAULT_EPS = 1e-9

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def kron(*mats: np.ndarray) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def ket(*bits: int, dims: Sequence[int] | None = None) -> np.ndarray:
    if dims is None:
        dims = [2] * len(bits)
    v = np.ones(1, dtype=complex)
    for b, d in zip(bits, dims):
        e = np.zeros(d, dtype=complex)
        e[b] = 1
        v = np.kron(v, e)
    return v


def dyad(v: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    w = v if w is None else w
    return np.outer(v, w.conj())


# pair vector |00>+|11>, deliberately unnormalized: contracting a channel
# representation against one of these implements channel composition with
# no stray factors, and it keeps process traces at the product of out-dims
def pair_vector(d: int = 2) -> np.ndarray:
    v = np.zeros(d * d, dtype=complex)
    for j in range(d):
        v[j * d + j] = 1
    return v


# ---------------------------------------------------------------------------
# labeled operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LabeledOperator:
    """Square operator with named tensor factors."""

    systems: tuple[tuple[str, int], ...]
    mat: np.ndarray

    def __post_init__(self):
        d = 1
        for _, dim in self.systems:
            d *= dim
        if self.mat.shape != (d, d):
            raise ValueError(
                f"operator shape {self.mat.shape} does not match labels {self.systems}"
            )
        names = [n for n, _ in self.systems]
        if len(set(names)) != len(names):
            raise ValueError("duplicate system labels")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.systems)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.systems)

    def tensor(self, other: LabeledOperator) -> LabeledOperator:
        return LabeledOperator(
            self.systems + other.systems, np.kron(self.mat, other.mat)
        )

    def reorder(self, names: Sequence[str]) -> LabeledOperator:
        if sorted(names) != sorted(self.names):
            raise ValueError("reorder must use exactly the existing labels")
        perm = [self.names.index(n) for n in names]
        k = len(perm)
        dims = self.dims
        full = self.mat.reshape(dims + dims)
        full = full.transpose(perm + [k + p for p in perm])
        d = self.mat.shape[0]
        return LabeledOperator(
            tuple(self.systems[p] for p in perm), full.reshape(d, d)
        )


def partial_trace(mat: np.ndarray, dims: Sequence[int], drop: Sequence[int]) -> np.ndarray:
    """Trace out the factors listed in drop (indices into dims)."""
    dims = tuple(dims)
    k = len(dims)
    t = mat.reshape(dims + dims)
    for axis in sorted(drop, reverse=True):
        t = np.trace(t, axis1=axis, axis2=axis + (t.ndim // 2))
    d = int(round(np.sqrt(t.size)))
    return t.reshape(d, d)


# ---------------------------------------------------------------------------
# channel representations
# ---------------------------------------------------------------------------


def cj_of(kraus: Sequence[np.ndarray], in_dim: int, out_dim: int) -> np.ndarray:
    """Representation of the map with the given Kraus operators, on in ⊗ out."""
    total = np.zeros((in_dim * out_dim, in_dim * out_dim), dtype=complex)
    for k in kraus:
        k = np.asarray(k, dtype=complex)
        if k.shape != (out_dim, in_dim):
            raise ValueError(f"Kraus shape {k.shape}, expected ({out_dim}, {in_dim})")
        lifted = np.kron(np.eye(in_dim, dtype=complex), k)
        g = dyad(pair_vector(in_dim))
        total += lifted @ g @ lifted.conj().T
    return total.T


def apply_cj(cj: np.ndarray, rho: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    """Run a state through the map encoded by cj; inverse of cj_of."""
    if rho.shape != (in_dim, in_dim):
        raise ValueError("state dimension mismatch")
    lifted = np.kron(rho.T, np.eye(out_dim, dtype=complex))
    return partial_trace(lifted @ cj.T, (in_dim, out_dim), (0,))


def tp_defect(cj: np.ndarray, in_dim: int, out_dim: int) -> float:
    """How far the encoded map is from trace-preserving."""
    marg = partial_trace(cj, (in_dim, out_dim), (1,))
    return float(np.max(np.abs(marg - np.eye(in_dim))))


@dataclass(frozen=True, eq=False)
class Instrument:
    """One party's operations: per input a, operators cjs[a][x] per outcome x.

    Complete positivity plus the trace-preservation of each per-input sum is
    what check() enforces; construction itself stays permissive so that
    broken instruments can be built and then diagnosed.
    """

    in_dim: int
    out_dim: int
    cjs: tuple[tuple[np.ndarray, ...], ...]

    @property
    def n_inputs(self) -> int:
        return len(self.cjs)

    @property
    def n_outcomes(self) -> int:
        return len(self.cjs[0])

    def cj(self, a: int, x: int) -> np.ndarray:
        return self.cjs[a][x]

    def check(self, eps: float = DEFAULT_EPS) -> None:
        d = self.in_dim * self.out_dim
        for a, row in enumerate(self.cjs):
            if len(row) != self.n_outcomes:
                raise ValueError("ragged outcome lists")
            total = np.zeros((d, d), dtype=complex)
            for x, op in enumerate(row):
                if op.shape != (d, d):
                    raise ValueError(f"operator ({a},{x}) has shape {op.shape}")
                if np.max(np.abs(op - op.conj().T)) > eps:
                    raise ValueError(f"operator ({a},{x}) is not Hermitian")
                if np.min(np.linalg.eigvalsh(op)) < -eps:
                    raise ValueError(f"operator ({a},{x}) is not positive")
                total += op
            defect = tp_defect(total, self.in_dim, self.out_dim)
            if defect > eps:
                raise ValueError(
                    f"input {a}: summed map is not trace-preserving (defect {defect:.3g})"
                )

    @staticmethod
    def from_kraus(
        in_dim: int,
        out_dim: int,
        table: Sequence[Sequence[Sequence[np.ndarray]]],
    ) -> Instrument:
        """table[a][x] is the Kraus list of the (input a, outcome x) branch."""
        cjs = tuple(
            tuple(cj_of(kraus, in_dim, out_dim) for kraus in row) for row in table
        )
        return Instrument(in_dim, out_dim, cjs)

    @staticmethod
    def unitary(u: np.ndarray) -> Instrument:
        d = u.shape[0]
        return Instrument.from_kraus(d, d, [[[u]]])

    @staticmethod
    def measure_prepare(
        povm: Sequence[np.ndarray], prepared: Sequence[np.ndarray]
    ) -> Instrument:
        """Measure the input with povm, prepare the state matching the outcome."""
        in_dim = povm[0].shape[0]
        out_dim = prepared[0].shape[0]
        cjs = tuple(
            np.kron(p, eta.T).astype(complex) for p, eta in zip(povm, prepared)
        )
        return Instrument(in_dim, out_dim, (cjs,))

    @staticmethod
    def measurement(povm: Sequence[np.ndarray]) -> Instrument:
        """Destructive measurement: nothing is returned to the environment."""
        cjs = tuple(np.asarray(p, dtype=complex) for p in povm)
        return Instrument(povm[0].shape[0], 1, (cjs,))


# ---------------------------------------------------------------------------
# process matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantumParty:
    """Party with labeled input/output factors; outputs may be absent."""

    name: str
    ins: tuple[tuple[str, int], ...]
    outs: tuple[tuple[str, int], ...]

    @property
    def in_dim(self) -> int:
        d = 1
        for _, dim in self.ins:
            d *= dim
        return d

    @property
    def out_dim(self) -> int:
        d = 1
        for _, dim in self.outs:
            d *= dim
        return d


def qubit_party(name: str) -> QuantumParty:
    return QuantumParty(name, ((f"I_{name}", 2),), ((f"O_{name}", 2),))


@dataclass(frozen=True, eq=False)
class ProcessMatrix:
    """Hermitian operator coupling all parties, labels grouped per party."""

    parties: tuple[QuantumParty, ...]
    op: LabeledOperator

    def __post_init__(self):
        expected = self.canonical_labels(self.parties)
        if self.op.names != expected:
            raise ValueError(
                f"labels {self.op.names} not in canonical order {expected}"
            )

    @staticmethod
    def canonical_labels(parties: Sequence[QuantumParty]) -> tuple[str, ...]:
        labels: list[str] = []
        for p in parties:
            labels.extend(n for n, _ in p.ins)
            labels.extend(n for n, _ in p.outs)
        return tuple(labels)

    @property
    def mat(self) -> np.ndarray:
        return self.op.mat

    @staticmethod
    def from_operator(
        parties: Sequence[QuantumParty], op: LabeledOperator
    ) -> ProcessMatrix:
        return ProcessMatrix(
            tuple(parties), op.reorder(ProcessMatrix.canonical_labels(parties))
        )


@dataclass(frozen=True)
class ValidationReport:
    hermitian: bool
    psd: bool
    min_eigenvalue: float
    unit_probability: bool
    max_unit_deviation: float

    @property
    def ok(self) -> bool:
        return self.hermitian and self.psd and self.unit_probability

    def __bool__(self) -> bool:
        return self.ok


def hermitian_basis(d: int) -> list[np.ndarray]:
    basis = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1
        basis.append(e)
    for j in range(d):
        for k in range(j + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[j, k] = e[k, j] = 1
            basis.append(e)
            f = np.zeros((d, d), dtype=complex)
            f[j, k] = -1j
            f[k, j] = 1j
            basis.append(f)
    return basis


def tp_affine_set(in_dim: int, out_dim: int) -> list[np.ndarray]:
    """Affine generating set of {C Hermitian : Tr_out C = identity_in}.

    Every trace-preserving map representation is an affine combination of
    these, so a condition affine in C holds for all instruments iff it
    holds on this finite set.  A party returning nothing has out_dim 1 and
    the set degenerates to the identity alone.
    """
    base = np.eye(in_dim * out_dim, dtype=complex) / out_dim
    if out_dim == 1:
        return [base]
    elements = [base]
    for h in hermitian_basis(in_dim * out_dim):
        marg = partial_trace(h, (in_dim, out_dim), (1,))
        correction = np.kron(marg, np.eye(out_dim, dtype=complex)) / out_dim
        elements.append(base + (h - correction))
    return elements


def validate(w: ProcessMatrix, eps: float = DEFAULT_EPS) -> ValidationReport:
    """Logical consistency: non-negative probabilities for every choice of
    local operations (positivity of w) and unit total probability for every
    choice (unit trace against all products of trace-preserving generators).
    """
    m = w.mat
    hermitian = bool(np.max(np.abs(m - m.conj().T)) <= eps)
    if hermitian:
        min_eig = float(np.min(np.linalg.eigvalsh(m)))
    else:
        min_eig = float("nan")
    psd = hermitian and min_eig >= -eps

    sets = [tp_affine_set(p.in_dim, p.out_dim) for p in w.parties]
    worst = 0.0
    for combo in itertools.product(*sets):
        value = np.trace(kron(*combo) @ m)
        worst = max(worst, abs(value - 1.0))
    unit = worst <= eps
    return ValidationReport(hermitian, psd, min_eig, unit, float(worst))


def probability(
    w: ProcessMatrix,
    instruments: Sequence[Instrument],
    inputs: Sequence[int],
    eps: float = DEFAULT_EPS,
) -> dict[tuple[int, ...], float]:
    """P(outcomes | inputs) = Tr((C_1 ⊗ ... ⊗ C_n) W), all outcome tuples."""
    if len(instruments) != len(w.parties):
        raise ValueError("one instrument per party required")
    for inst, p in zip(instruments, w.parties):
        if (inst.in_dim, inst.out_dim) != (p.in_dim, p.out_dim):
            raise ValueError(f"instrument dimensions do not match party {p.name}")
    if len(inputs) != len(w.parties):
        raise ValueError("one input per party required")

    dist: dict[tuple[int, ...], float] = {}
    total = 0.0
    ranges = [range(inst.n_outcomes) for inst in instruments]
    for xs in itertools.product(*ranges):
        ops = [inst.cj(a, x) for inst, a, x in zip(instruments, inputs, xs)]
        value = complex(np.trace(kron(*ops) @ w.mat))
        if abs(value.imag) > eps:
            raise ValueError(f"probability for {xs} is not real: {value}")
        if value.real < -eps:
            raise ValueError(f"probability for {xs} is negative: {value.real}")
        dist[xs] = value.real
        total += value.real
    if abs(total - 1.0) > eps:
        raise ValueError(
            f"outcome probabilities sum to {total}, not 1; "
            "the process matrix or the instruments are inconsistent"
        )
    return dist


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def maximally_entangled() -> np.ndarray:
    v = pair_vector(2) / np.sqrt(2)
    return dyad(v)


def w_state(rho: np.ndarray | None = None) -> ProcessMatrix:
    """Both parties receive (one half each of) the state rho; nothing they
    send back is looked at."""
    if rho is None:
        rho = maximally_entangled()
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("expected a two-qubit state")
    if np.max(np.abs(rho - rho.conj().T)) > DEFAULT_EPS:
        raise ValueError("state is not Hermitian")
    if np.min(np.linalg.eigvalsh(rho)) < -DEFAULT_EPS:
        raise ValueError("state is not positive")
    if abs(np.trace(rho) - 1) > DEFAULT_EPS:
        raise ValueError("state is not normalized")
    parties = (qubit_party("R"), qubit_party("S"))
    op = LabeledOperator(
        (("I_S", 2), ("I_R", 2), ("O_S", 2), ("O_R", 2)),
        kron(rho, PAULI_I, PAULI_I),
    )
    return ProcessMatrix.from_operator(parties, op)


def w_channel() -> ProcessMatrix:
    """Ideal qubit channel from the first party to the second."""
    parties = (qubit_party("R"), qubit_party("S"))
    psi = dyad(pair_vector(2)) / 2  # the normalized maximally entangled state
    op = LabeledOperator(
        (("I_R", 2), ("O_R", 2), ("I_S", 2), ("O_S", 2)),
        kron(PAULI_I, psi, PAULI_I),
    )
    return ProcessMatrix(parties, op)


def w_two_channels() -> ProcessMatrix:
    """Channel R -> S tensored with channel S -> R; not consistent: each
    party could rewrite what it receives before it is sent, closing a loop."""
    parties = (qubit_party("R"), qubit_party("S"))
    pair = dyad(pair_vector(2))
    op = LabeledOperator(
        (("O_R", 2), ("I_S", 2), ("O_S", 2), ("I_R", 2)),
        kron(pair, pair),
    )
    return ProcessMatrix.from_operator(parties, op)


def superposed_channel_parties() -> tuple[QuantumParty, ...]:
    return (
        qubit_party("R"),
        qubit_party("S"),
        QuantumParty("T", (("I_T", 2), ("I_T'", 2)), ()),
    )


def w_superposed_channel() -> ProcessMatrix:
    """Coherent superposition, steered by a control qubit handed to a third
    party, of routing a target through R then S or through S then R."""
    parties = superposed_channel_parties()
    pair = pair_vector(2)
    # branch order R then S: target enters R, leaves for S, leaves for T
    labels_a = ("I_R", "O_R", "I_S", "O_S", "I_T", "I_T'")
    branch_a = kron_vec(ket(0), pair, pair, ket(0))
    # branch order S then R, written on its own label order then merged
    labels_b = ("I_S", "O_S", "I_R", "O_R", "I_T", "I_T'")
    branch_b = kron_vec(ket(0), pair, pair, ket(1))
    canonical = ProcessMatrix.canonical_labels(parties)
    vec_a = reorder_vector(branch_a, labels_a, canonical)
    vec_b = reorder_vector(branch_b, labels_b, canonical)
    w_vec = (vec_a + vec_b) / np.sqrt(2)
    op = LabeledOperator(
        tuple((n, 2) for n in canonical), dyad(w_vec)
    )
    return ProcessMatrix(parties, op)


def kron_vec(*vecs: np.ndarray) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vecs:
        out = np.kron(out, v)
    return out


def reorder_vector(
    vec: np.ndarray, labels: Sequence[str], target: Sequence[str]
) -> np.ndarray:
    if sorted(labels) != sorted(target):
        raise ValueError("reorder must use exactly the existing labels")
    dims = (2,) * len(labels)
    perm = [list(labels).index(n) for n in target]
    return vec.reshape(dims).transpose(perm).reshape(-1)


def w_ocb() -> ProcessMatrix:
    """Two-party process matrix with no causal ordering of the parties."""
    parties = (qubit_party("R"), qubit_party("S"))
    mat = (
        kron(PAULI_I, PAULI_I, PAULI_I, PAULI_I)
        + (
            kron(PAULI_I, PAULI_Z, PAULI_Z, PAULI_I)
            + kron(PAULI_Z, PAULI_I, PAULI_X, PAULI_Z)
        )
        / np.sqrt(2)
    ) / 4
    op = LabeledOperator(
        (("I_R", 2), ("O_R", 2), ("I_S", 2), ("O_S", 2)), mat
    )
    return ProcessMatrix(parties, op)


# ---------------------------------------------------------------------------
# the two-party guessing game, quantum side
# ---------------------------------------------------------------------------


def ocb_instruments(rho: np.ndarray | None = None) -> tuple[Instrument, Instrument]:
    """Operations achieving the over-causal success rate on w_ocb.

    The second party's input packs (b, flag) as b*2 + flag.  On flag 0 it
    measures x-basis and reprepares z conditioned on b xor outcome; on flag 1
    it measures z-basis and emits a fixed state rho (default fully mixed).
    The z measurement is what reads the first party's bit: the only matrix
    term touching the first party's output pairs z there with z here.
    """
    if rho is None:
        rho = PAULI_I / 2
    rho = np.asarray(rho, dtype=complex)

    def zproj(s: int) -> np.ndarray:
        return (PAULI_I + (-1) ** s * PAULI_Z) / 2

    def xproj(s: int) -> np.ndarray:
        return (PAULI_I + (-1) ** s * PAULI_X) / 2

    first = Instrument(
        2,
        2,
        tuple(
            tuple(np.kron(zproj(x), zproj(a).T) for x in range(2))
            for a in range(2)
        ),
    )
    rows = []
    for bidx in range(4):
        b, flag = divmod(bidx, 2)
        if flag == 0:
            rows.append(
                tuple(np.kron(xproj(y), zproj(b ^ y).T) for y in range(2))
            )
        else:
            rows.append(tuple(np.kron(zproj(y), rho.T) for y in range(2)))
    second = Instrument(2, 2, tuple(rows))
    return first, second


def ocb_game_value(
    rho: np.ndarray | None = None, eps: float = DEFAULT_EPS
) -> tuple[float, dict[str, float]]:
    """Success rate of the guessing game on w_ocb: the flag says whether the
    first party guesses b or the second guesses a; inputs are uniform."""
    w = w_ocb()
    first, second = ocb_instruments(rho)
    win_by_flag = {0: 0.0, 1: 0.0}
    for a in range(2):
        for bidx in range(4):
            b, flag = divmod(bidx, 2)
            dist = probability(w, (first, second), (a, bidx), eps)
            for (x, y), p in dist.items():
                if (flag == 0 and x == b) or (flag == 1 and y == a):
                    win_by_flag[flag] += p / 4
    breakdown = {f"flag={fl}": v for fl, v in win_by_flag.items()}
    return (win_by_flag[0] + win_by_flag[1]) / 2, breakdown


# ---------------------------------------------------------------------------
# one-query commutation discrimination
# ---------------------------------------------------------------------------


def commute_test(
    b: np.ndarray, c: np.ndarray, eps: float = DEFAULT_EPS
) -> int:
    """Decide whether two qubit unitaries commute (0) or anticommute (1)
    with a single use of each, by running them in a superposition of both
    orders and reading the control out in the +/- basis.

    The promise must hold: anything in between leaves the control mixed and
    raises PromiseViolationError.
    """
    w = w_superposed_channel()
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
    control = Instrument.measurement(
        [np.kron(PAULI_I, dyad(plus)), np.kron(PAULI_I, dyad(minus))]
    )
    dist = probability(
        w,
        (Instrument.unitary(b), Instrument.unitary(c), control),
        (0, 0, 0),
        eps,
    )
    outcome = max(dist, key=dist.get)
    if dist[outcome] < 1 - eps:
        raise PromiseViolationError(
            f"expected a deterministic control readout, got {dist}"
        )
    return outcome[2]


# ---------------------------------------------------------------------------
# random trace-preserving instruments (for audits)
# ---------------------------------------------------------------------------


def random_instrument(
    rng: np.random.Generator,
    in_dim: int,
    out_dim: int,
    n_inputs: int = 1,
    n_outcomes: int = 2,
) -> Instrument:
    """Haar-ish random instrument: per input, a random isometry into
    out ⊗ outcome-ancilla, split by the ancilla basis."""
    big = out_dim * n_outcomes
    if big < in_dim:
        raise ValueError(
            "out_dim * n_outcomes must reach in_dim to fit an isometry"
        )
    rows = []
    for _ in range(n_inputs):
        g = rng.normal(size=(big, in_dim)) + 1j * rng.normal(size=(big, in_dim))
        v, _ = np.linalg.qr(g)
        v = v[:, :in_dim]
        kraus_by_outcome = []
        for x in range(n_outcomes):
            sel = np.zeros((out_dim, big), dtype=complex)
            for j in range(out_dim):
                sel[j, j * n_outcomes + x] = 1
            kraus_by_outcome.append([sel @ v])
        rows.append(kraus_by_outcome)
    return Instrument.from_kraus(in_dim, out_dim, rows)


# ---------------------------------------------------------------------------
# presets and files
# ---------------------------------------------------------------------------

MATRIX_PRESETS = ("w-state", "w-channel", "w-superposed", "w-ocb", "w-two-channels")


def preset_matrix(name: str) -> ProcessMatrix:
    if name == "w-state":
        return w_state()
    if name == "w-channel":
        return w_channel()
    if name == "w-superposed":
        return w_superposed_channel()
    if name == "w-ocb":
        return w_ocb()
    if name == "w-two-channels":
        return w_two_channels()
    raise KeyError(f"unknown process-matrix preset {name!r}; choose from {MATRIX_PRESETS}")


_LABEL = re.compile(r"^(I|O)_([A-Za-z][A-Za-z0-9]*'*)$")


def parties_from_labels(systems: Sequence[tuple[str, int]]) -> tuple[QuantumParty, ...]:
    """Group I_/O_ labels into parties by name, in order of first appearance."""
    order: list[str] = []
    ins: dict[str, list[tuple[str, int]]] = {}
    outs: dict[str, list[tuple[str, int]]] = {}
    for label, dim in systems:
        m = _LABEL.match(label)
        if not m:
            raise ValueError(
                f"label {label!r} is not of the form I_NAME or O_NAME"
            )
        side, pname = m.groups()
        pname = pname.rstrip("'")
        if pname not in order:
            order.append(pname)
            ins[pname] = []
            outs[pname] = []
        (ins if side == "I" else outs)[pname].append((label, dim))
    return tuple(
        QuantumParty(n, tuple(ins[n]), tuple(outs[n])) for n in order
    )


def parse_operator_file(text: str) -> ProcessMatrix:
    """First data line: LABEL DIM pairs; then one line per matrix row with
    complex entries 're,im'.  '#' starts a comment."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    if not lines:
        raise ValueError("line 1: empty operator file")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) % 2 != 0 or not parts:
        raise ValueError(f"line {lineno}: expected LABEL DIM pairs")
    systems = []
    for k in range(0, len(parts), 2):
        try:
            systems.append((parts[k], int(parts[k + 1])))
        except ValueError:
            raise ValueError(f"line {lineno}: bad dimension {parts[k + 1]!r}")
    d = 1
    for _, dim in systems:
        d *= dim
    rows = []
    for lineno, line in lines[1:]:
        entries = []
        for token in line.split():
            try:
                re_s, im_s = token.split(",")
                entries.append(complex(float(re_s), float(im_s)))
            except ValueError:
                raise ValueError(f"line {lineno}: bad entry {token!r}")
        if len(entries) != d:
            raise ValueError(
                f"line {lineno}: expected {d} entries, found {len(entries)}"
            )
        rows.append(entries)
    if len(rows) != d:
        raise ValueError(f"line 1: expected {d} matrix rows, found {len(rows)}")
    op = LabeledOperator(tuple(systems), np.array(rows, dtype=complex))
    return ProcessMatrix.from_operator(parties_from_labels(systems), op)


def format_operator_file(w: ProcessMatrix) -> str:
    header = " ".join(f"{n} {d}" for n, d in w.op.systems)
    lines = [header]
    for row in w.mat:
        lines.append(" ".join(f"{v.real:.17g},{v.imag:.17g}" for v in row))
    return "\n".join(lines) + "\n"
