import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from hamrec.quantum_core import (
    CNOT,
    TOFFOLI,
    X,
    Y,
    Z,
    BlochHamiltonian,
    DomainError,
    apply_gate,
    choi_vec,
    frame_unitary,
    hermitian_min_eig,
    is_unitary,
    kron,
    rotation_gate,
    rx,
    rz,
    su2_from_rotation,
)

unit_vectors = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(
    lambda v: np.linalg.norm(v) > 1e-3
).map(lambda v: tuple(np.asarray(v) / np.linalg.norm(v)))


def test_axis_must_be_normalized():
    with pytest.raises(DomainError):
        BlochHamiltonian((1.0, 1.0, 0.0))
    assert BlochHamiltonian.normalized((1.0, 1.0, 0.0)).axis[0] == pytest.approx(2**-0.5)


@given(unit_vectors, st.floats(-10, 10))
def test_rotation_gate_matches_matrix_exponential(n, theta):
    H = BlochHamiltonian(n)
    assert np.allclose(rotation_gate(H, theta), expm(-1j * theta * H.matrix), atol=1e-12)


def test_standard_gates():
    assert np.allclose(rz(0.3), expm(-0.15j * Z))
    assert np.allclose(rx(0.3), expm(-0.15j * X))


def test_choi_vec_convention():
    # |U>> = sum_j |j> (x) U|j>
    U = rotation_gate("y", 0.7) @ rz(0.2)
    expected = sum(np.kron(np.eye(2)[j], U @ np.eye(2)[j]) for j in range(2))
    assert np.allclose(choi_vec(U), expected)


@given(unit_vectors, st.floats(0, 2 * np.pi))
def test_choi_conjugation(n, theta):
    V = rotation_gate(n, 0.4)
    U = rotation_gate("z", theta)
    lhs = choi_vec(V @ U @ V.conj().T)
    assert np.allclose(lhs, np.kron(V.conj(), V) @ choi_vec(U), atol=1e-12)


def test_apply_gate_against_kron():
    rng = np.random.default_rng(1)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    full = kron(np.eye(2), CNOT)
    assert np.allclose(apply_gate(psi, CNOT, [1, 2]), full @ psi)
    # control on qubit 2, target qubit 1: conjugate by swapping
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(apply_gate(psi, CNOT, [2, 1]), kron(np.eye(2), swap @ CNOT @ swap) @ psi)
    assert np.allclose(apply_gate(psi, TOFFOLI, [0, 1, 2]), TOFFOLI @ psi)


def test_apply_gate_rejects_bad_targets():
    with pytest.raises(DomainError):
        apply_gate(np.ones(4), CNOT, [0, 0])
    with pytest.raises(DomainError):
        apply_gate(np.ones(4), X, [2])


def test_hermitian_min_eig():
    assert hermitian_min_eig(np.diag([3.0, -1.0])) == pytest.approx(-1.0)
    with pytest.raises(DomainError):
        hermitian_min_eig(np.array([[0, 1], [0, 0]]))


@settings(max_examples=50)
@given(unit_vectors, unit_vectors)
def test_frame_unitary(a, b):
    a = np.asarray(a)
    b = np.asarray(b) - (np.asarray(b) @ a) * a
    if np.linalg.norm(b) < 1e-3:
        return
    b /= np.linalg.norm(b)
    V = frame_unitary(a, b)
    assert is_unitary(V)
    sa = a[0] * X + a[1] * Y + a[2] * Z
    sb = b[0] * X + b[1] * Y + b[2] * Z
    assert np.allclose(V @ sa @ V.conj().T, X, atol=1e-10)
    assert np.allclose(V @ sb @ V.conj().T, Z, atol=1e-10)


def test_frame_unitary_needs_orthogonal_axes():
    with pytest.raises(DomainError):
        frame_unitary((1, 0, 0), (1 / np.sqrt(2), 0, 1 / np.sqrt(2)))


def test_su2_from_rotation_rejects_reflection():
    with pytest.raises(DomainError):
        su2_from_rotation(np.diag([1.0, 1.0, -1.0]))
