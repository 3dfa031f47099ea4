"""Recognition protocols as gate lists, with exact and sampled outcome statistics.

Angles follow the main-text convention: the unknown slot applies
U_H(theta) = exp(-i H theta) with theta in (0, pi].
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import simpson
from scipy.special import eval_chebyu

from .qsp_synthesis import PhaseSequence, synthesize
from .quantum_core import (
    CNOT,
    CSWAP,
    HADAMARD,
    TOFFOLI,
    X,
    DomainError,
    as_hamiltonian,
    frame_unitary,
    rotation_gate,
    rx,
    rz,
)

QUAD_POINTS = 2049


# --------------------------------------------------------------------------
# circuit description


@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    targets: tuple
    matrix: np.ndarray
    angle: float | None = None

    def to_dict(self) -> dict:
        d = {"type": "gate", "name": self.name, "targets": list(self.targets)}
        if self.angle is not None:
            d["angle"] = self.angle
        else:
            d["matrix"] = [[[z.real, z.imag] for z in row] for row in self.matrix]
        return d


@dataclass(frozen=True)
class Slot:
    target: int

    def to_dict(self) -> dict:
        return {"type": "slot", "targets": [self.target]}


@dataclass(frozen=True, eq=False)
class ProtocolCircuit:
    qubit_count: int
    k: int
    ops: tuple
    measured: tuple
    decision: dict
    labels: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.qubit_count not in (1, 3):
            raise DomainError("protocol circuits use 1 or 3 qubits")
        if sum(isinstance(op, Slot) for op in self.ops) != self.k:
            raise DomainError("slot count differs from k")
        outcomes = {"".join(b) for b in itertools.product("01", repeat=len(self.measured))}
        if set(self.decision) != outcomes:
            raise DomainError("decision map must cover every outcome")
        if not set(self.decision.values()) <= set(self.labels):
            raise DomainError("decision map uses an unknown label")

    @property
    def slot_count(self) -> int:
        return self.k

    @property
    def fixed_gate_count(self) -> int:
        return sum(isinstance(op, Gate) for op in self.ops)

    @property
    def outcomes(self) -> list[str]:
        return sorted(self.decision)

    def to_json(self) -> str:
        return json.dumps(
            {
                "qubits": self.qubit_count,
                "k": self.k,
                "ops": [op.to_dict() for op in self.ops],
                "measured": list(self.measured),
                "decision": self.decision,
            }
        )


@dataclass(frozen=True)
class HypothesisSet:
    labels: tuple
    axes: tuple
    priors: tuple

    def __post_init__(self):
        if not (len(self.labels) == len(self.axes) == len(self.priors)):
            raise DomainError("labels, axes and priors must align")
        if abs(sum(self.priors) - 1) > 1e-12:
            raise DomainError("priors must sum to 1")
        object.__setattr__(self, "axes", tuple(as_hamiltonian(a) for a in self.axes))

    def pairwise_orthogonal(self) -> bool:
        v = [a.vector for a in self.axes]
        return all(abs(v[i] @ v[j]) < 1e-10 for i in range(len(v)) for j in range(i))


@dataclass(frozen=True)
class RecognitionOutcome:
    guess: str
    raw: str
    success: bool


XZ = HypothesisSet(("X", "Z"), ("x", "z"), (0.5, 0.5))
XYZ = HypothesisSet(("X", "Y", "Z"), ("x", "y", "z"), (1 / 3, 1 / 3, 1 / 3))


def _rz_gate(angle: float, target: int = 0) -> Gate:
    return Gate("rz", (target,), rz(angle), float(angle))


# --------------------------------------------------------------------------
# error polynomial


def error_polynomial(k: int, theta):
    """f_k(theta) from the Fourier sum with weights (k - |l| + 1)/(k+1)^2."""
    theta = np.asarray(theta, dtype=float)
    l = np.arange(1, k + 1)
    w = (k - l + 1) / (k + 1) ** 2
    val = 1.0 / (k + 1) + 2 * np.cos(2 * np.multiply.outer(theta, l)) @ w
    return val


def fejer_form(k: int, theta):
    """[sin((k+1) theta) / ((k+1) sin theta)]^2 with the removable points filled in."""
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta)
    near = np.abs(s) < 1e-6
    safe = np.where(near, 1.0, s)
    out = (np.sin((k + 1) * theta) / ((k + 1) * safe)) ** 2
    if np.any(near):
        out = np.where(near, (eval_chebyu(k, np.cos(theta)) / (k + 1)) ** 2, out)
    return out


def perfect_discrimination_angles(k: int) -> np.ndarray:
    """Zeros of f_k in (0, pi): j pi / (k+1)."""
    return np.arange(1, k + 1) * np.pi / (k + 1)


# --------------------------------------------------------------------------
# circuits


def _binary_odd_ops(phases: PhaseSequence) -> list:
    psi = phases.array
    k = phases.k
    ops = [_rz_gate(-2 * psi[k])]
    for j in range(k - 1, -1, -1):
        ops += [Slot(0), _rz_gate(-2 * psi[j])]
    return ops


def _binary_even_ops(phases: PhaseSequence) -> list:
    # The reflected X-phase circuit recognizes X perfectly.  Conjugating every
    # slot by a Hadamard swaps the roles of X and Z; the Hadamards are merged
    # into Z-phase gates and a final X flips the outcome so that 0 means Z.
    phi = phases.array
    n = len(phi) - 1
    ops = [Gate("rz_h", (0,), rz(-phi[0]) @ HADAMARD)]
    for j in range(1, n):
        ops += [Slot(0), _rz_gate(-phi[j])]
    ops += [Slot(0), Gate("reflect", (0,), rx(np.pi) @ rz(-2 * phi[n]))]
    for j in range(n - 1, 0, -1):
        ops += [Slot(0), _rz_gate(phi[j])]
    ops += [Slot(0), Gate("h_rz_x", (0,), X @ HADAMARD @ rz(phi[0]))]
    return ops


def build_binary_circuit(k: int, phases: PhaseSequence | None = None) -> ProtocolCircuit:
    """Single-qubit {X, Z} protocol: outcome 0 means Z, outcome 1 means X."""
    if k < 1:
        raise DomainError("k must be positive")
    phases = phases or synthesize(k)
    ops = _binary_odd_ops(phases) if k % 2 else _binary_even_ops(phases)
    return ProtocolCircuit(
        1, k, tuple(ops), (0,), {"0": "Z", "1": "X"}, ("X", "Z"), {"phases": phases, "kind": "binary"}
    )


def ternary_phases(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Rz angles (phi_x, phi_y) for the two coherent QSP branches.

    phi_y is chosen so that the Y-branch off-diagonal amplitude is i times the
    conjugate of the X-branch one.
    """
    psi = synthesize(k).array
    phx = -2 * psi
    phy = -phx.copy()
    phy[0] -= 1.5 * np.pi
    phy[k] += 0.5 * np.pi
    return phx, phy


def ternary_final_gate(total_x: float, total_y: float) -> np.ndarray:
    return np.array(
        [
            [np.exp(0.5j * total_y), np.exp(-0.5j * total_x)],
            [np.exp(0.5j * total_x), -np.exp(-0.5j * total_y)],
        ]
    ) / np.sqrt(2)


def build_ternary_circuit(k: int) -> ProtocolCircuit:
    """Three-qubit {X, Y, Z} protocol; outcomes are s0 s1 from qubits 0 and 2."""
    if k < 1 or k % 2 == 0:
        raise DomainError("the ternary protocol is defined for odd k")
    phx, phy = ternary_phases(k)
    ops = [
        Gate("h", (0,), HADAMARD),
        Gate("cnot", (0, 1), CNOT),
        Gate("cnot", (0, 2), CNOT),
    ]
    for j in range(k, 0, -1):
        ops += [
            _rz_gate(phx[j], 1),
            _rz_gate(phy[j], 2),
            Gate("cswap", (0, 1, 2), CSWAP),
            Slot(2),
            Gate("cswap", (0, 1, 2), CSWAP),
        ]
    ops += [
        _rz_gate(phx[0], 1),
        _rz_gate(phy[0], 2),
        Gate("cswap", (0, 1, 2), CSWAP),
        Gate("cnot", (0, 2), CNOT),
        Gate("h", (0,), HADAMARD),
        Gate("u_final", (1,), ternary_final_gate(phx.sum(), phy.sum())),
        Gate("toffoli", (1, 2, 0), TOFFOLI),
    ]
    decision = {"00": "Z", "10": "Z", "01": "Y", "11": "X"}
    return ProtocolCircuit(3, k, tuple(ops), (0, 2), decision, ("X", "Y", "Z"), {"kind": "ternary"})


def _fuse_single_qubit(ops: list) -> list:
    out = []
    for op in ops:
        if out and isinstance(op, Gate) and isinstance(out[-1], Gate) and op.targets == out[-1].targets:
            prev = out.pop()
            out.append(Gate(f"{op.name}*{prev.name}", op.targets, op.matrix @ prev.matrix))
        else:
            out.append(op)
    return out


def general_axis_binary(n0, n1, k: int) -> ProtocolCircuit:
    """{n0, n1} protocol: every slot is pre/post-processed by the frame unitary."""
    V = frame_unitary(n0, n1)
    base = build_binary_circuit(k)
    ops = []
    for op in base.ops:
        if isinstance(op, Slot):
            ops += [Gate("frame_in", (0,), V.conj().T), op, Gate("frame_out", (0,), V)]
        else:
            ops.append(op)
    ops = _fuse_single_qubit(ops)
    decision = {"0": "H1", "1": "H0"}
    meta = dict(base.meta, frame=V, axes=(as_hamiltonian(n0), as_hamiltonian(n1)))
    return ProtocolCircuit(1, k, tuple(ops), (0,), decision, ("H0", "H1"), meta)


# --------------------------------------------------------------------------
# simulation


def _apply_fixed(psi: np.ndarray, gate: np.ndarray, targets) -> np.ndarray:
    m = len(targets)
    g = gate.reshape([2] * (2 * m))
    ax = [t + 1 for t in targets]
    out = np.tensordot(psi, g, axes=(ax, list(range(m, 2 * m))))
    # output axes were appended at the end; move them back
    return np.moveaxis(out, list(range(psi.ndim - m, psi.ndim)), ax)


def _apply_batched(psi: np.ndarray, mats: np.ndarray, target: int) -> np.ndarray:
    moved = np.moveaxis(psi, target + 1, -1)
    out = np.einsum("b...j,bij->b...i", moved, mats)
    return np.moveaxis(out, -1, target + 1)


def run_circuit(circuit: ProtocolCircuit, slot_unitaries: np.ndarray) -> np.ndarray:
    """Final states for a batch of 2x2 slot unitaries, shape (B, 2^n)."""
    mats = np.asarray(slot_unitaries, dtype=complex)
    if mats.ndim == 2:
        mats = mats[None]
    B = mats.shape[0]
    n = circuit.qubit_count
    psi = np.zeros((B,) + (2,) * n, dtype=complex)
    psi[(slice(None),) + (0,) * n] = 1.0
    for op in circuit.ops:
        if isinstance(op, Slot):
            psi = _apply_batched(psi, mats, op.target)
        else:
            psi = _apply_fixed(psi, op.matrix, op.targets)
    return psi.reshape(B, -1)


def slot_unitaries(hidden, thetas) -> np.ndarray:
    H = as_hamiltonian(hidden).matrix
    t = np.atleast_1d(np.asarray(thetas, dtype=float))
    return np.cos(t)[:, None, None] * np.eye(2) - 1j * np.sin(t)[:, None, None] * H


def outcome_probabilities(circuit: ProtocolCircuit, hidden, thetas) -> np.ndarray:
    """Array (B, 2^|measured|) of outcome probabilities, outcomes in binary order."""
    states = run_circuit(circuit, slot_unitaries(hidden, thetas))
    n = circuit.qubit_count
    probs = (np.abs(states) ** 2).reshape((-1,) + (2,) * n)
    keep = [q + 1 for q in circuit.measured]
    drop = tuple(a for a in range(1, n + 1) if a not in keep)
    marg = probs.sum(axis=drop) if drop else probs
    return marg.reshape(marg.shape[0], -1)


def outcome_distribution(circuit: ProtocolCircuit, hidden, theta: float) -> dict:
    p = outcome_probabilities(circuit, hidden, [theta])[0]
    return {s: float(v) for s, v in zip(circuit.outcomes, p)}


def guess_probabilities(circuit: ProtocolCircuit, hidden, thetas) -> dict:
    """Probability of each guessed label, one array entry per theta."""
    p = outcome_probabilities(circuit, hidden, thetas)
    out = {lab: np.zeros(p.shape[0]) for lab in circuit.labels}
    for i, s in enumerate(circuit.outcomes):
        out[circuit.decision[s]] += p[:, i]
    return out


def sample_shots(circuit: ProtocolCircuit, hidden, theta: float, shots: int, seed: int) -> dict:
    if shots < 1:
        raise DomainError("shots must be positive")
    p = outcome_probabilities(circuit, hidden, [theta])[0]
    p = np.clip(p, 0, None)
    p = p / p.sum()
    counts = np.random.default_rng(seed).multinomial(shots, p)
    return {s: int(c) for s, c in zip(circuit.outcomes, counts)}


def recognize_once(circuit: ProtocolCircuit, hidden_label: str, hidden, theta: float, rng) -> RecognitionOutcome:
    p = outcome_probabilities(circuit, hidden, [theta])[0]
    raw = circuit.outcomes[rng.choice(len(p), p=np.clip(p, 0, None) / p.sum())]
    guess = circuit.decision[raw]
    return RecognitionOutcome(guess, raw, guess == hidden_label)


# --------------------------------------------------------------------------
# averages


def theta_grid(points: int = QUAD_POINTS) -> np.ndarray:
    return np.linspace(0.0, np.pi, points)


def theta_average(values: np.ndarray, thetas: np.ndarray) -> float:
    """(1/pi) times the composite Simpson integral over [0, pi]."""
    return float(simpson(values, x=thetas) / np.pi)


def closed_form_success(kind: str, k: int) -> Fraction:
    if kind == "binary":
        return Fraction(2 * k + 1, 2 * k + 2)
    if kind == "ternary":
        if k % 2 == 0:
            raise DomainError("ternary closed form holds for odd k")
        return Fraction(3 * k + 1, 3 * k + 3)
    raise DomainError(f"unknown protocol kind {kind!r}")


def simulated_success(circuit: ProtocolCircuit, hypotheses: HypothesisSet, points: int = QUAD_POINTS) -> float:
    """Prior-weighted, theta-averaged probability of a correct guess."""
    t = theta_grid(points)
    total = 0.0
    for label, axis, prior in zip(hypotheses.labels, hypotheses.axes, hypotheses.priors):
        total += prior * theta_average(guess_probabilities(circuit, axis, t)[label], t)
    return total


def average_success(kind: str, k: int, method: str = "closed"):
    """Closed form as a Fraction, or the quadrature of the simulated circuit."""
    if method == "closed":
        return closed_form_success(kind, k)
    if kind == "binary":
        return simulated_success(build_binary_circuit(k), XZ)
    if kind == "ternary":
        return simulated_success(build_ternary_circuit(k), XYZ)
    raise DomainError(f"unknown protocol kind {kind!r}")


def success_variance(k: int, method: str = "closed") -> float:
    """Variance of the per-query success over both hypotheses and both angles.

    The success for angles (theta_0, theta_1) is c_Z(theta_0)/2 + c_X(theta_1)/2
    with c_H the probability of a correct guess; the two angles are
    independent, so the variances add.  ``method="quadrature"`` integrates the
    simulated circuit; the closed form follows from c_Z = 1 and c_X = 1 - f_k.
    """
    if k < 1:
        raise DomainError("k must be positive")
    if method == "closed":
        return k * (2 * k + 1) / (12 * (k + 1) ** 3)
    t = theta_grid()
    circuit = build_binary_circuit(k)
    total = 0.0
    for label, axis in zip(XZ.labels, XZ.axes):
        c = guess_probabilities(circuit, axis, t)[label]
        mean = theta_average(c, t)
        total += 0.25 * theta_average((c - mean) ** 2, t)
    return total
