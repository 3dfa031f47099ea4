"""Performance operators, comb constraints, dual certificates and the recognition SDP.

Operators on k slots live on 2k qubits ordered I1 O1 I2 O2 ... Ik Ok, the
ordering produced by tensoring ``choi_vec`` slot by slot.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation

from .protocols import (
    ProtocolCircuit,
    Slot,
    _apply_fixed,
    build_binary_circuit,
    build_ternary_circuit,
    closed_form_success,
)
from .quantum_core import (
    PAULIS,
    BlochHamiltonian,
    DomainError,
    as_hamiltonian,
    choi_vec,
    rotation_gate,
    su2_from_rotation,
)
from .sdp import SDPResult, solve_block_sdp

MAX_DENSE_K = 6
MAX_SDP_K = 3
MAX_TESTER_K = 4
PSD_TOL = 1e-9


class ResourceError(RuntimeError):
    """Requested size exceeds the dense-matrix budget."""


class CertificateError(RuntimeError):
    pass


def psd_threshold(norm: float, tol: float = PSD_TOL) -> float:
    return -tol * max(1.0, norm)


def _maybe_real(M: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    if np.iscomplexobj(M) and np.abs(M.imag).max(initial=0.0) <= tol:
        return np.ascontiguousarray(M.real)
    return M


# --------------------------------------------------------------------------
# factored Hermitian operators F G F^dag


def factored_min_eig(F: np.ndarray, G: np.ndarray) -> tuple[float, float]:
    """(min eigenvalue, spectral norm) of F G F^dag without forming it.

    Eigenvalues outside the column span of F are zero and are included
    whenever F has fewer columns than rows.
    """
    Q, R = np.linalg.qr(F)
    small = R @ G @ R.conj().T
    w = np.linalg.eigvalsh(0.5 * (small + small.conj().T))
    lo = w[0]
    if Q.shape[1] < F.shape[0]:
        lo = min(lo, 0.0)
    return float(lo), float(np.abs(w).max(initial=0.0))


# --------------------------------------------------------------------------
# performance operators


def axis_frame(axis) -> np.ndarray:
    """SU(2) element V with V Z V^dag = n.sigma."""
    n = as_hamiltonian(axis).vector
    cross = np.array([-n[1], n[0], 0.0])  # z x n
    s = np.linalg.norm(cross)
    if s < 1e-15:
        rv = np.zeros(3) if n[2] > 0 else np.array([np.pi, 0.0, 0.0])
    else:
        rv = cross / s * np.arctan2(s, n[2])
    return su2_from_rotation(Rotation.from_rotvec(rv).as_matrix())


def _doubled_index(bits) -> int:
    # |j1 j1 j2 j2 ...> in the interleaved ordering
    k = len(bits)
    return sum(3 * b * 4 ** (k - 1 - i) for i, b in enumerate(bits))


def _apply_per_slot(vectors: np.ndarray, K: np.ndarray, k: int) -> np.ndarray:
    """Apply K^{(x)k} (K acting on one I,O pair) to the columns of ``vectors``."""
    cols = vectors.shape[1]
    T = vectors.reshape((4,) * k + (cols,))
    for s in range(k):
        T = np.moveaxis(np.tensordot(K, T, axes=([1], [s])), 0, s)
    return T.reshape(4**k, cols)


@dataclass
class PerformanceOperator:
    """Theta-averaged k-fold Choi projector of exp(-i H theta).

    Stored as orthogonal columns ``vectors[:, lam]`` (one per weight class
    lam = 0..k) so that the operator is ``vectors @ vectors^dag``.
    """

    k: int
    axis: BlochHamiltonian
    vectors: np.ndarray
    weight_classes: dict
    _dense: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return 4**self.k

    @property
    def multiplicities(self) -> list[int]:
        return [len(self.weight_classes[lam]) for lam in range(self.k + 1)]

    @property
    def matrix(self) -> np.ndarray:
        if self._dense is None:
            self._dense = _maybe_real(self.vectors @ self.vectors.conj().T)
        return self._dense

    @property
    def trace(self) -> float:
        return float(np.sum(np.abs(self.vectors) ** 2))

    def min_eig(self) -> float:
        return factored_min_eig(self.vectors, np.eye(self.vectors.shape[1]))[0]

    def check(self) -> dict:
        M = self.matrix
        herm = float(np.abs(M - M.conj().T).max())
        # U(1) covariance: slot-wise post-multiplication by exp(-i H phi)
        U = rotation_gate(self.axis, 0.377)
        K = np.kron(np.eye(2), U)
        rotated = _apply_per_slot(self.vectors, K, self.k)
        drift = float(np.abs(rotated @ rotated.conj().T - M).max())
        lo = self.min_eig()
        return {
            "hermitian_residual": herm,
            "trace_residual": abs(self.trace - 2**self.k),
            "min_eig": lo,
            "u1_residual": drift,
            "passed": herm <= 1e-10 and abs(self.trace - 2**self.k) <= 1e-8 and lo >= -1e-9 and drift <= 1e-10,
        }


def performance_operator(axis, k: int) -> PerformanceOperator:
    if k < 1:
        raise DomainError("k must be positive")
    if k > MAX_DENSE_K:
        raise ResourceError(f"k={k} exceeds the dense budget k <= {MAX_DENSE_K}")
    h = as_hamiltonian(axis)
    classes = {lam: [] for lam in range(k + 1)}
    for bits in itertools.product((0, 1), repeat=k):
        classes[sum(bits)].append(bits)
    B = np.zeros((4**k, k + 1), dtype=complex)
    for lam, members in classes.items():
        for bits in members:
            B[_doubled_index(bits), lam] = 1.0
    V = axis_frame(h)
    if np.abs(V - np.eye(2)).max() > 1e-15:
        B = _apply_per_slot(B, np.kron(V.conj(), V), k)
    return PerformanceOperator(k, h, B, classes)


def quadrature_operator(axis, k: int, points: int = 128) -> np.ndarray:
    """Trapezoid average of |U>><<U|^{(x)k} over one period of theta."""
    if k > 5:
        raise ResourceError("quadrature check limited to k <= 5")
    h = as_hamiltonian(axis)
    thetas = 2 * np.pi * np.arange(points) / points
    rows = []
    for t in thetas:
        v = choi_vec(rotation_gate(h, t))
        full = v
        for _ in range(k - 1):
            full = np.kron(full, v)
        rows.append(full)
    A = np.array(rows)
    return A.T @ A.conj() / points


def identity_choi(k: int) -> np.ndarray:
    """|I>>^{(x)k} as a vector."""
    v = np.zeros(4**k)
    for bits in itertools.product((0, 1), repeat=k):
        v[_doubled_index(bits)] = 1.0
    return v


# --------------------------------------------------------------------------
# trace-and-replace and comb constraints

_LABEL = re.compile(r"^([IO])(\d+)$")


def subsystem_index(label, k: int) -> int:
    if isinstance(label, (int, np.integer)):
        idx = int(label)
    else:
        m = _LABEL.match(str(label))
        if not m:
            raise DomainError(f"bad subsystem label {label!r}")
        slot = int(m.group(2))
        if not 1 <= slot <= k:
            raise DomainError(f"slot {slot} out of range for k={k}")
        idx = 2 * (slot - 1) + (m.group(1) == "O")
    if not 0 <= idx < 2 * k:
        raise DomainError(f"subsystem {label!r} out of range")
    return idx


def trace_and_replace(M: np.ndarray, subsystems, n_qubits: int | None = None) -> np.ndarray:
    """tr_X(M) (x) I_X / d_X over the listed qubits (indices or I/O labels).

    Labels such as "O2" need the interleaved slot layout and therefore an
    even qubit count.
    """
    M = np.asarray(M)
    n = int(round(np.log2(M.shape[0]))) if n_qubits is None else n_qubits
    if M.shape != (2**n, 2**n):
        raise DomainError("matrix dimension is not 2^n")
    idx = sorted({subsystem_index(s, max(n // 2, 1)) if isinstance(s, str) else int(s) for s in subsystems})
    if any(i < 0 or i >= n for i in idx):
        raise DomainError(f"subsystems {subsystems} out of range for {n} qubits")
    out = M
    for i in idx:
        a, r = 2**i, 2 ** (n - i - 1)
        T = out.reshape(a, 2, r, a, 2, r)
        red = np.einsum("aibcid->abcd", T)
        rep = np.zeros_like(T)
        rep[:, 0, :, :, 0, :] = red / 2
        rep[:, 1, :, :, 1, :] = red / 2
        out = rep.reshape(2**n, 2**n)
    return out


@dataclass(frozen=True)
class Identity:
    """lhs-map(W) == rhs-map(W); each side is a set of replaced subsystems."""

    lhs: tuple
    rhs: tuple

    @property
    def name(self) -> str:
        def side(s):
            return "W" if not s else "_{" + "".join(s) + "}W"

        return f"{side(self.lhs)} = {side(self.rhs)}"

    def residual(self, W: np.ndarray, k: int) -> float:
        L = trace_and_replace(W, self.lhs, 2 * k) if self.lhs else W
        R = trace_and_replace(W, self.rhs, 2 * k) if self.rhs else W
        return float(np.abs(L - R).max())

    def pauli_allowed(self, trivial: np.ndarray, k: int) -> np.ndarray:
        """Mask of Pauli strings P with lhs(P) == rhs(P) (both maps are diagonal)."""
        lhs = [subsystem_index(s, k) for s in self.lhs]
        rhs = [subsystem_index(s, k) for s in self.rhs]
        keep_l = trivial[:, lhs].all(axis=1) if lhs else np.ones(len(trivial), bool)
        keep_r = trivial[:, rhs].all(axis=1) if rhs else np.ones(len(trivial), bool)
        return keep_l == keep_r


@dataclass(frozen=True)
class CombConstraints:
    k: int
    strategy: str
    identities: tuple
    trace: float

    def __post_init__(self):
        for ident in self.identities:
            for lab in ident.lhs + ident.rhs:
                subsystem_index(lab, self.k)


def _io(slots, k):
    out = []
    for s in slots:
        out += [f"I{s}", f"O{s}"]
    return out


class _NonSignalingIdentity(Identity):
    """General-strategy tester condition, which is not a single pair of maps.

    W must be orthogonal to every non-identity operator of the non-signalling
    dual space; equivalently prod_i (id - _{O_i} + _{I_i O_i}) W = _{all} W.
    """

    @property
    def name(self) -> str:
        return "prod_i (id - _{O_i} + _{I_iO_i}) W = _{all}W"

    def residual(self, W, k):
        L = W
        for s in range(1, k + 1):
            L = L - trace_and_replace(L, [f"O{s}"], 2 * k) + trace_and_replace(L, [f"I{s}", f"O{s}"], 2 * k)
        R = trace_and_replace(W, list(range(2 * k)), 2 * k)
        return float(np.abs(L - R).max())

    def pauli_allowed(self, trivial, k):
        I = trivial[:, 0::2]
        O = trivial[:, 1::2]
        in_dual = (~O | I).all(axis=1)  # every slot is II or has nontrivial O
        identity = trivial.all(axis=1)
        return ~in_dual | identity


def comb_constraints(k: int, strategy: str) -> CombConstraints:
    if k < 1:
        raise DomainError("k must be positive")
    tr = float(2**k)
    ids = []
    if strategy == "PAR":
        ids.append(Identity((), tuple(f"O{s}" for s in range(1, k + 1))))
    elif strategy == "SEQ":
        ids.append(Identity((), (f"O{k}",)))
        for j in range(k, 1, -1):
            tail = _io(range(j, k + 1), k)
            ids.append(Identity(tuple(tail), tuple([f"O{j - 1}"] + tail)))
    elif strategy == "GEN":
        ids.append(_NonSignalingIdentity((), ()))
    elif strategy == "dual-SEQ":
        ids.append(Identity((f"O{k}",), (f"I{k}", f"O{k}")))
        for j in range(k - 1, 0, -1):
            tail = _io(range(j + 1, k + 1), k)
            ids.append(Identity(tuple([f"O{j}"] + tail), tuple([f"I{j}", f"O{j}"] + tail)))
    elif strategy == "dual-GEN":
        for s in range(1, k + 1):
            ids.append(Identity((f"O{s}",), (f"I{s}", f"O{s}")))
    else:
        raise DomainError(f"unknown strategy {strategy!r}")
    return CombConstraints(k, strategy, tuple(ids), tr)


@dataclass
class ConstraintReport:
    strategy: str
    residuals: dict
    trace_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.trace_residual <= self.tol and all(r <= self.tol for r in self.residuals.values())

    def failures(self) -> list[str]:
        bad = [n for n, r in self.residuals.items() if r > self.tol]
        if self.trace_residual > self.tol:
            bad.append("trace")
        return bad

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "residuals": self.residuals,
            "trace_residual": self.trace_residual,
            "passed": self.passed,
        }


def check_constraints(W: np.ndarray, constraints: CombConstraints, tol: float = 1e-9) -> ConstraintReport:
    W = np.asarray(W)
    k = constraints.k
    if W.shape != (4**k, 4**k):
        raise DomainError(f"expected a {4**k}x{4**k} operator, got {W.shape}")
    res = {ident.name: ident.residual(W, k) for ident in constraints.identities}
    tr_res = abs(float(np.real(np.trace(W))) - constraints.trace)
    return ConstraintReport(constraints.strategy, res, tr_res, tol)


# --------------------------------------------------------------------------
# dual certificates


@dataclass
class DualCertificate:
    k: int
    kind: str
    lam: Fraction
    W: np.ndarray
    slack_min_eigs: dict
    w_min_eig: float
    reports: list
    slack_identity_residual: float

    @property
    def passed(self) -> bool:
        return (
            self.w_min_eig >= psd_threshold(1.0)
            and all(v >= psd_threshold(1.0) for v in self.slack_min_eigs.values())
            and all(r.passed for r in self.reports)
            and self.slack_identity_residual <= 1e-9
        )

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "set": self.kind,
            "lambda": float(self.lam),
            "lambda_exact": f"{self.lam.numerator}/{self.lam.denominator}",
            "w_min_eig": self.w_min_eig,
            "slack_min_eigs": self.slack_min_eigs,
            "slack_identity_residual": self.slack_identity_residual,
            "constraints": [r.to_dict() for r in self.reports],
            "passed": self.passed,
        }


def _certificate(k: int, labels: tuple, kind: str, lam: Fraction, a: Fraction, b: Fraction) -> DualCertificate:
    """W = a * sum_j Omega_j - b |I>><<I|; slack_j = m lam W - Omega_j."""
    if k > MAX_DENSE_K:
        raise ResourceError(f"k={k} exceeds the dense budget k <= {MAX_DENSE_K}")
    ops = {lab: performance_operator(lab.lower(), k) for lab in labels}
    m = len(labels)
    phi = identity_choi(k)[:, None]
    F = np.hstack([ops[lab].vectors for lab in labels] + [phi])
    ncols = F.shape[1]
    idx = {}
    start = 0
    for lab in labels:
        idx[lab] = slice(start, start + k + 1)
        start += k + 1
    G_W = np.zeros((ncols, ncols))
    for lab in labels:
        G_W[idx[lab], idx[lab]] = float(a) * np.eye(k + 1)
    G_W[-1, -1] = -float(b)
    w_lo, _ = factored_min_eig(F, G_W)
    slack = {}
    for lab in labels:
        G = m * float(lam) * G_W
        G[idx[lab], idx[lab]] -= np.eye(k + 1)
        slack[lab] = factored_min_eig(F, G)[0]
    # the slack must equal sum_{j != i}(Omega_j - |I>><<I|/(k+1))
    G_exp = np.zeros((ncols, ncols))
    first = labels[0]
    for lab in labels[1:]:
        G_exp[idx[lab], idx[lab]] = np.eye(k + 1)
        G_exp[-1, -1] -= 1.0 / (k + 1)
    G_diff = m * float(lam) * G_W - G_exp
    G_diff[idx[first], idx[first]] -= np.eye(k + 1)
    lo, hi = factored_min_eig(F, G_diff)
    ident_res = max(abs(lo), abs(hi))
    W = _maybe_real((F @ G_W) @ F.conj().T)
    reports = [check_constraints(W, comb_constraints(k, s)) for s in ("dual-SEQ", "dual-GEN")]
    return DualCertificate(k, kind, lam, W, slack, w_lo, reports, ident_res)


def binary_certificate(k: int, strict: bool = True) -> DualCertificate:
    lam = Fraction(2 * k + 1, 2 * k + 2)
    cert = _certificate(k, ("X", "Z"), "binary", lam, Fraction(k + 1, 2 * k + 1), Fraction(1, 2 * k + 1))
    if strict and not cert.passed:
        raise CertificateError(f"binary certificate failed at k={k}: {cert.to_dict()}")
    return cert


def ternary_certificate(k: int, strict: bool = True) -> DualCertificate:
    if k % 2 == 0:
        raise DomainError("ternary certificate needs odd k")
    if k > 5:
        raise ResourceError("ternary certificate limited to k <= 5")
    lam = Fraction(3 * k + 1, 3 * k + 3)
    cert = _certificate(k, ("X", "Y", "Z"), "ternary", lam, Fraction(k + 1, 3 * k + 1), Fraction(2, 3 * k + 1))
    if strict and not cert.passed:
        raise CertificateError(f"ternary certificate failed at k={k}: {cert.to_dict()}")
    return cert


def projector_gap(axis, k: int, dense: bool = True) -> float:
    """min eig of Omega_H - |I>><<I|^{(x)k}/(k+1)."""
    op = performance_operator(axis, k)
    phi = identity_choi(k)
    if dense:
        M = op.matrix - np.outer(phi, phi) / (k + 1)
        return float(np.linalg.eigvalsh(M)[0])
    F = np.hstack([op.vectors, phi[:, None]])
    G = np.eye(k + 2)
    G[-1, -1] = -1.0 / (k + 1)
    return factored_min_eig(F, G)[0]


# --------------------------------------------------------------------------
# testers from circuits


@dataclass
class TesterRealization:
    k: int
    labels: tuple
    operators: dict  # label -> 4^k x 4^k PSD matrix

    @property
    def W(self) -> np.ndarray:
        return sum(self.operators.values())

    def pair(self, label: str, omega) -> float:
        M = omega.matrix if isinstance(omega, PerformanceOperator) else np.asarray(omega)
        return float(np.real(np.vdot(M, self.operators[label])))

    def probability(self, label: str, U: np.ndarray) -> float:
        v = choi_vec(U)
        full = v
        for _ in range(self.k - 1):
            full = np.kron(full, v)
        return float(np.real(np.vdot(full, self.operators[label] @ full)))

    def check(self, tol: float = 1e-9) -> dict:
        eigs = {lab: float(np.linalg.eigvalsh(T)[0]) for lab, T in self.operators.items()}
        rep = check_constraints(self.W, comb_constraints(self.k, "SEQ"), tol)
        return {
            "min_eigs": eigs,
            "constraints": rep.to_dict(),
            "passed": rep.passed and all(e >= psd_threshold(1.0, tol) for e in eigs.values()),
        }


def circuit_to_tester(circuit: ProtocolCircuit) -> TesterRealization:
    """Tester operators of a circuit by opening each slot into |o><i| pieces."""
    k = circuit.k
    if k > MAX_TESTER_K:
        raise ResourceError(f"tester extraction limited to k <= {MAX_TESTER_K}")
    n = circuit.qubit_count
    # psi has a leading combined (i1,o1,...,il,ol) index
    psi = np.zeros((1,) + (2,) * n, dtype=complex)
    psi[(0,) + (0,) * n] = 1.0
    for op in circuit.ops:
        if isinstance(op, Slot):
            t = op.target + 1
            moved = np.moveaxis(psi, t, 1)  # (C, target, rest...)
            C = moved.shape[0]
            new = np.zeros((C, 2, 2) + moved.shape[1:], dtype=complex)
            for i in (0, 1):
                for o in (0, 1):
                    new[:, i, o, o] = moved[:, i]
            new = new.reshape((4 * C,) + moved.shape[1:])
            psi = np.moveaxis(new, 1, t)
        else:
            psi = _apply_fixed(psi, op.matrix, op.targets)
    C = psi.shape[0]
    amps = psi.reshape(C, -1)  # amps[(i,o), f]
    measured = list(circuit.measured)
    ops = {lab: np.zeros((C, C), dtype=complex) for lab in circuit.labels}
    for f in range(2**n):
        bits = format(f, f"0{n}b")
        s = "".join(bits[q] for q in measured)
        v = amps[:, f].conj()
        ops[circuit.decision[s]] += np.outer(v, v.conj())
    ops = {lab: _maybe_real(T) for lab, T in ops.items()}
    return TesterRealization(k, circuit.labels, ops)


# --------------------------------------------------------------------------
# SDP


def dual_basis(constraints: CombConstraints, real: bool = False) -> tuple[np.ndarray, int]:
    """Orthonormal Pauli-string basis of the homogeneous dual space.

    Every trace-and-replace map is diagonal on Pauli strings, so the kernel
    of the identities is spanned by the strings each identity keeps.
    Returns (basis of shape (s, n, n), position of the identity string).
    """
    k = constraints.k
    nq = 2 * k
    codes = np.array(list(itertools.product(range(4), repeat=nq)), dtype=np.int8)
    trivial = codes == 0
    keep = np.ones(len(codes), bool)
    for ident in constraints.identities:
        keep &= ident.pauli_allowed(trivial, k)
    if real:
        keep &= (codes == 2).sum(axis=1) % 2 == 0
    codes = codes[keep]
    paulis = np.array(PAULIS)
    mats = np.ones((len(codes), 1, 1), dtype=complex)
    for q in range(nq):
        P = paulis[codes[:, q]]
        s = mats.shape[1]
        mats = np.einsum("nab,ncd->nacbd", mats, P).reshape(len(codes), 2 * s, 2 * s)
    mats /= np.sqrt(4**k)
    if real:
        mats = np.ascontiguousarray(mats.real)
    ident_pos = int(np.flatnonzero((codes == 0).all(axis=1))[0])
    return mats, ident_pos


@dataclass
class RecognitionSDP:
    value: float
    witness: np.ndarray  # W-bar with trace 2^k
    V: np.ndarray
    strategy: str
    result: SDPResult

    def witness_report(self, tol: float = 1e-6) -> ConstraintReport:
        k = int(round(np.log(self.V.shape[0]) / np.log(4)))
        return check_constraints(self.witness, comb_constraints(k, "dual-" + self.strategy), tol)


def solve_recognition_sdp(operators, priors=None, strategy: str = "SEQ", **solver_kw) -> RecognitionSDP:
    """min lambda s.t. p_j Omega_j <= lambda W-bar, W-bar in the dual space.

    Solved in the variable V = lambda W-bar, for which the objective is
    tr(V) / 2^k and every constraint is linear.
    """
    mats = [op.matrix if isinstance(op, PerformanceOperator) else np.asarray(op) for op in operators]
    if not mats:
        raise DomainError("need at least one operator")
    dim = mats[0].shape[0]
    if any(M.shape != (dim, dim) for M in mats):
        raise DomainError("operators must share one dimension")
    k = int(round(np.log(dim) / np.log(4)))
    if 4**k != dim:
        raise DomainError("operator dimension is not 4^k")
    if k > MAX_SDP_K:
        raise ResourceError(f"SDP path limited to k <= {MAX_SDP_K}")
    if strategy not in ("SEQ", "GEN"):
        raise DomainError("strategy must be SEQ or GEN")
    m = len(mats)
    p = np.full(m, 1.0 / m) if priors is None else np.asarray(priors, dtype=float)
    if p.shape != (m,) or abs(p.sum() - 1) > 1e-12 or np.any(p < 0):
        raise DomainError("priors must be a probability vector")
    real = all(np.abs(np.imag(M)).max() <= 1e-13 for M in mats)
    cons = comb_constraints(k, "dual-" + strategy)
    basis, ident = dual_basis(cons, real=real)
    blocks = [pj * (M.real if real else M) for pj, M in zip(p, mats)]
    c = np.array([np.trace(B).real / 2**k for B in basis])
    y_id = np.zeros(len(basis))
    y_id[ident] = np.sqrt(4**k)
    res = solve_block_sdp(basis, c, blocks, y_identity=y_id, **solver_kw)
    V = np.tensordot(res.y, basis, axes=1)
    value = res.dual
    return RecognitionSDP(value, V / value, V, strategy, res)


# --------------------------------------------------------------------------
# general-axis sweep and the one-slot Helstrom oracle


@dataclass
class SweepRow:
    alpha: float
    axis: tuple
    optimal: float
    fixed: float
    guess: float = 0.5
    error: str | None = None

    @property
    def ordered(self) -> bool:
        if self.error:
            return False
        return self.optimal >= self.fixed - 1e-6 and self.fixed >= self.guess - 1e-6


def sweep_axis(alpha: float) -> np.ndarray:
    return np.array([np.sin(alpha), 0.0, np.cos(alpha)])


def general_axis_sweep(k: int, alphas=None, points: int = 21) -> list[SweepRow]:
    """Optimal and fixed-protocol success for H0 = n0.sigma against H1 = Z.

    n0 = (sin a, 0, cos a) sweeps from z (a = 0) to x (a = pi/2).
    """
    if k not in (1, 3):
        raise DomainError("sweep supports k in {1, 3}")
    if alphas is None:
        alphas = np.linspace(0.0, np.pi / 2, points)
    tester = circuit_to_tester(build_binary_circuit(k))
    omega_z = performance_operator("z", k)
    rows = []
    for a in alphas:
        n0 = sweep_axis(a)
        omega_0 = performance_operator(BlochHamiltonian.normalized(n0), k)
        fixed = 0.5 * (tester.pair("X", omega_0) + tester.pair("Z", omega_z))
        try:
            opt = solve_recognition_sdp([omega_0, omega_z]).value
            rows.append(SweepRow(float(a), tuple(n0), opt, fixed))
        except Exception as exc:  # recorded per row, the sweep continues
            rows.append(SweepRow(float(a), tuple(n0), float("nan"), fixed, error=str(exc)))
    return rows


def _dephase(rho: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Theta average of (I (x) U) rho (I (x) U)^dag for U = exp(-i H theta), H^2 = I."""
    K = np.kron(np.eye(2), H)
    return 0.5 * (rho + K @ rho @ K)


def helstrom_oracle(n0, n1="z", samples: int = 100_000, seed: int = 0, polish: bool = True) -> float:
    """Best one-slot success over pure probe states on system (x) ancilla."""
    H0 = as_hamiltonian(n0).matrix
    H1 = as_hamiltonian(n1).matrix
    K0 = np.kron(np.eye(2), H0)
    K1 = np.kron(np.eye(2), H1)
    rng = np.random.default_rng(seed)

    def values(psi):
        rho = psi[:, :, None] * psi[:, None, :].conj()
        d = 0.5 * (K0 @ rho @ K0 - K1 @ rho @ K1)  # the plain rho terms cancel
        ev = np.linalg.eigvalsh(d)
        return 0.5 + 0.25 * np.abs(ev).sum(axis=1)

    best = 0.0
    best_psi = None
    for chunk in range(0, samples, 20_000):
        n = min(20_000, samples - chunk)
        psi = rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4))
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        v = values(psi)
        i = int(np.argmax(v))
        if v[i] > best:
            best, best_psi = float(v[i]), psi[i]
    if polish:
        def neg(x):
            z = x[:4] + 1j * x[4:]
            return -values((z / np.linalg.norm(z))[None])[0]

        x0 = np.concatenate([best_psi.real, best_psi.imag])
        res = minimize(neg, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        best = max(best, float(-res.fun))
    return best


def ternary_tester(k: int) -> TesterRealization:
    return circuit_to_tester(build_ternary_circuit(k))
