"""Dense single- and few-qubit linear algebra.

Matrices and state vectors are plain numpy arrays.  Qubit 0 is the leftmost
tensor factor, i.e. the most significant bit of a basis-state index.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation


class DomainError(ValueError):
    """Raised when an argument violates a documented precondition."""


I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = (I2, X, Y, Z)

CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
CSWAP = np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 6, 5, 7]]
TOFFOLI = np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 5, 7, 6]]

AXIS_LABELS = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
}


@dataclass(frozen=True)
class BlochHamiltonian:
    """H = n.sigma for a unit vector n."""

    axis: tuple

    def __post_init__(self):
        n = np.asarray(self.axis, dtype=float)
        if n.shape != (3,) or not np.all(np.isfinite(n)):
            raise DomainError(f"axis must be a finite 3-vector, got {self.axis!r}")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise DomainError(f"axis {self.axis!r} is not normalized")
        object.__setattr__(self, "axis", tuple(float(v) for v in n))

    @classmethod
    def from_label(cls, label: str) -> "BlochHamiltonian":
        return cls(AXIS_LABELS[label.lower()])

    @classmethod
    def normalized(cls, vec) -> "BlochHamiltonian":
        v = np.asarray(vec, dtype=float)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise DomainError("zero axis cannot be normalized")
        return cls(tuple(v / nrm))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.axis)

    @property
    def matrix(self) -> np.ndarray:
        nx, ny, nz = self.axis
        return nx * X + ny * Y + nz * Z


def as_hamiltonian(h) -> BlochHamiltonian:
    """Accept a BlochHamiltonian, an axis label or a 3-vector."""
    if isinstance(h, BlochHamiltonian):
        return h
    if isinstance(h, str):
        return BlochHamiltonian.from_label(h)
    return BlochHamiltonian(tuple(np.asarray(h, dtype=float)))


def rotation_gate(axis, angle: float) -> np.ndarray:
    """exp(-i angle n.sigma) = cos(angle) I - i sin(angle) n.sigma."""
    h = as_hamiltonian(axis)
    return np.cos(angle) * I2 - 1j * np.sin(angle) * h.matrix


def rz(angle: float) -> np.ndarray:
    """Standard gate Rz(a) = exp(-i a Z / 2)."""
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def rx(angle: float) -> np.ndarray:
    """Standard gate Rx(a) = exp(-i a X / 2)."""
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * X


def kron(*ops) -> np.ndarray:
    if not ops:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, ops)


def choi_vec(U: np.ndarray) -> np.ndarray:
    """|U>> = sum_j |j> (x) U|j>, input factor first."""
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DomainError("choi_vec needs a square matrix")
    # component (j, i) of the double ket is U[i, j]
    return U.T.reshape(-1).astype(complex)


def basis_state(index: int, qubits: int) -> np.ndarray:
    psi = np.zeros(2**qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def apply_gate(state: np.ndarray, gate: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply a 2^m x 2^m gate to the listed qubits of a state vector.

    The first listed target is the most significant bit of the gate's
    own index, so CNOT with targets (c, t) has control c.
    """
    state = np.asarray(state, dtype=complex)
    n = int(round(np.log2(state.size)))
    if 2**n != state.size:
        raise DomainError("state length is not a power of two")
    targets = list(targets)
    m = len(targets)
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2**m, 2**m):
        raise DomainError(f"gate shape {gate.shape} does not match {m} targets")
    if len(set(targets)) != m or any(t < 0 or t >= n for t in targets):
        raise DomainError(f"invalid targets {targets} for {n} qubits")
    psi = state.reshape([2] * n)
    g = gate.reshape([2] * (2 * m))
    out = np.tensordot(g, psi, axes=(list(range(m, 2 * m)), targets))
    # tensordot puts the gate's output axes first; move them back in place
    out = np.moveaxis(out, list(range(m)), targets)
    return out.reshape(-1)


def hermitian_min_eig(M: np.ndarray, return_vector: bool = False, tol: float = 1e-10):
    """Smallest eigenvalue of a Hermitian matrix via LAPACK eigh."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("matrix must be square")
    scale = max(1.0, float(np.abs(M).max())) if M.size else 1.0
    if np.abs(M - M.conj().T).max() > tol * scale:
        raise DomainError("matrix is not Hermitian")
    H = 0.5 * (M + M.conj().T)
    if not return_vector:
        return float(np.linalg.eigvalsh(H)[0])
    w, v = np.linalg.eigh(H)
    return float(w[0]), v[:, 0]


def is_unitary(M: np.ndarray, tol: float = 1e-10) -> bool:
    M = np.asarray(M)
    return bool(np.abs(M.conj().T @ M - np.eye(M.shape[0])).max() <= tol)


def phase_aligned_distance(A: np.ndarray, B: np.ndarray) -> float:
    """max|A - e^{ia} B| with the global phase a chosen from the overlap tr(B^dag A)."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    ov = np.vdot(B, A)
    phase = ov / abs(ov) if abs(ov) > 1e-300 else 1.0
    return float(np.abs(A - phase * B).max())


def su2_from_rotation(R: np.ndarray) -> np.ndarray:
    """SU(2) element U with U (n.sigma) U^dag = (R n).sigma; sign is arbitrary."""
    R = np.asarray(R, dtype=float)
    if abs(np.linalg.det(R) - 1.0) > 1e-9 or np.abs(R.T @ R - np.eye(3)).max() > 1e-9:
        raise DomainError("not a proper rotation matrix")
    qx, qy, qz, qw = Rotation.from_matrix(R).as_quat()
    return qw * I2 - 1j * (qx * X + qy * Y + qz * Z)


def frame_unitary(n0, n1) -> np.ndarray:
    """U with U (n0.sigma) U^dag = X and U (n1.sigma) U^dag = Z."""
    a = as_hamiltonian(n0).vector
    b = as_hamiltonian(n1).vector
    if abs(a @ b) > 1e-10:
        raise DomainError("frame_unitary needs orthogonal axes")
    n2 = np.cross(b, a)
    R = np.column_stack([a, n2, b])
    if np.linalg.det(R) < 0:
        R[:, 1] = -n2
    # R sends x, y, z to n0, n2, n1; its transpose undoes that
    return su2_from_rotation(R.T)
