from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from hamrec.protocols import build_binary_circuit, build_ternary_circuit, guess_probabilities
from hamrec.quantum_core import BlochHamiltonian, DomainError, rotation_gate, su2_from_rotation
from hamrec.tester_sdp import (
    ResourceError,
    binary_certificate,
    check_constraints,
    circuit_to_tester,
    comb_constraints,
    dual_basis,
    general_axis_sweep,
    identity_choi,
    projector_gap,
    performance_operator,
    quadrature_operator,
    solve_recognition_sdp,
    ternary_certificate,
    trace_and_replace,
)


def random_hermitian(n, rng):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return A + A.conj().T


def test_omega_z_k1():
    M = performance_operator("z", 1).matrix
    # |00><00| + |11><11|: only the j = l terms survive the average
    expected = np.diag([1.0, 0.0, 0.0, 1.0])
    assert np.allclose(M, expected)


def test_omega_z_k2_weight_classes():
    op = performance_operator("z", 2)
    assert op.multiplicities == [1, 2, 1]
    assert op.trace == pytest.approx(4.0)
    assert np.linalg.matrix_rank(op.matrix) == 3


@pytest.mark.parametrize("axis", ["x", "y", "z"])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_analytic_matches_quadrature(axis, k):
    op = performance_operator(axis, k)
    assert np.linalg.norm(op.matrix - quadrature_operator(axis, k)) <= 1e-8
    assert op.check()["passed"]


def test_axis_x_is_hadamard_conjugate():
    Hd = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    K = np.kron(Hd.conj(), Hd)
    assert np.allclose(performance_operator("x", 1).matrix, K @ performance_operator("z", 1).matrix @ K.conj().T)


@settings(max_examples=20, deadline=None)
@given(st.tuples(*[st.floats(-3, 3)] * 3), st.sampled_from([1, 2]))
def test_conjugation_covariance(rotvec, k):
    R = Rotation.from_rotvec(rotvec).as_matrix()
    U = su2_from_rotation(R)
    n = np.array([0.3, -0.5, 0.81])
    n /= np.linalg.norm(n)
    base = performance_operator(BlochHamiltonian(tuple(n)), k).matrix
    moved = performance_operator(BlochHamiltonian.normalized(R @ n), k).matrix
    K = np.kron(U.conj(), U)
    Kk = K if k == 1 else np.kron(K, K)
    assert np.abs(moved - Kk @ base @ Kk.conj().T).max() <= 1e-10


def test_performance_operator_budget():
    with pytest.raises(ResourceError):
        performance_operator("z", 7)


def test_trace_and_replace_examples():
    assert np.allclose(trace_and_replace(np.eye(4), [0]), np.eye(4))
    assert np.allclose(trace_and_replace(np.eye(4), [1]), np.eye(4))
    P = np.zeros((4, 4))
    P[0, 0] = 1
    assert np.allclose(trace_and_replace(P, [1]), np.kron(np.diag([1, 0]), np.eye(2) / 2))
    with pytest.raises(DomainError):
        trace_and_replace(np.eye(4), [2])
    with pytest.raises(DomainError):
        trace_and_replace(np.eye(16), ["O3"])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.integers(0, 3), min_size=1, max_size=3, unique=True))
def test_trace_and_replace_idempotent_and_trace_preserving(seed, subs):
    M = random_hermitian(16, np.random.default_rng(seed))
    once = trace_and_replace(M, subs)
    assert np.abs(trace_and_replace(once, subs) - once).max() <= 1e-12
    assert np.trace(once) == pytest.approx(np.trace(M), abs=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_identity_choi_is_a_dual_comb(k):
    phi = identity_choi(k)
    W = np.outer(phi, phi)
    assert check_constraints(W, comb_constraints(k, "dual-SEQ")).passed
    assert check_constraints(W, comb_constraints(k, "dual-GEN")).passed
    for ax in "xyz":
        assert check_constraints(performance_operator(ax, k).matrix, comb_constraints(k, "dual-SEQ")).passed


def test_wrong_trace_is_reported():
    M = random_hermitian(16, np.random.default_rng(0))
    rep = check_constraints(M, comb_constraints(2, "SEQ"))
    assert not rep.passed
    assert "trace" in rep.failures()
    assert rep.trace_residual > 1e-3


def test_unknown_strategy():
    with pytest.raises(DomainError):
        comb_constraints(2, "ICO")


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("strategy", ["SEQ", "GEN", "PAR", "dual-SEQ", "dual-GEN"])
def test_pauli_basis_spans_constraint_kernel(k, strategy):
    cons = comb_constraints(k, strategy)
    basis, ident = dual_basis(cons)
    # every basis element satisfies the identities (the trace is free)
    for B in basis[:: max(1, len(basis) // 12)]:
        rep = check_constraints(B, cons)
        assert all(r <= 1e-12 for r in rep.residuals.values())
    # and the kernel dimension agrees with a dense null-space computation
    n = 4**k
    cols = []
    for E in np.eye(n * n).reshape(n * n, n, n):
        cols.append(np.concatenate([_lhs_minus_rhs(i, E, k).ravel() for i in cons.identities]))
    A = np.array(cols).T
    nullity = n * n - np.linalg.matrix_rank(A, tol=1e-9)
    assert len(basis) == nullity
    assert np.allclose(basis[ident], np.eye(n) / np.sqrt(n))


def _lhs_minus_rhs(ident, E, k):
    L = trace_and_replace(E, ident.lhs, 2 * k) if ident.lhs else E
    R = trace_and_replace(E, ident.rhs, 2 * k) if ident.rhs else E
    if not ident.lhs and not ident.rhs:  # non-signalling identity
        L = E
        for s in range(1, k + 1):
            L = L - trace_and_replace(L, [f"O{s}"], 2 * k) + trace_and_replace(L, [f"I{s}", f"O{s}"], 2 * k)
        R = trace_and_replace(E, list(range(2 * k)), 2 * k)
    return L - R


def test_binary_certificate_k1_dense():
    cert = binary_certificate(1)
    assert float(cert.lam) == 0.75
    ox, oz = performance_operator("x", 1).matrix, performance_operator("z", 1).matrix
    phi = identity_choi(1)
    slack = oz - 0.5 * np.outer(phi, phi)
    assert np.allclose(2 * 0.75 * cert.W - ox, slack)
    assert np.linalg.eigvalsh(slack)[0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_binary_certificate_passes(k):
    cert = binary_certificate(k)
    assert cert.passed
    assert cert.lam == Fraction(2 * k + 1, 2 * k + 2)


@pytest.mark.parametrize("k,lam", [(1, 2 / 3), (3, 5 / 6)])
def test_ternary_certificate(k, lam):
    cert = ternary_certificate(k)
    assert float(cert.lam) == pytest.approx(lam)
    assert cert.passed
    # each slack is a sum of two operator-minus-projector terms
    ops = {a: performance_operator(a.lower(), k).matrix for a in "XYZ"}
    phi = identity_choi(k)
    T = np.outer(phi, phi) / (k + 1)
    for lab in "XYZ":
        others = [o for o in "XYZ" if o != lab]
        expected = sum(ops[o] - T for o in others)
        assert np.abs(3 * float(cert.lam) * cert.W - ops[lab] - expected).max() < 1e-12


def test_ternary_certificate_even_k():
    with pytest.raises(DomainError):
        ternary_certificate(2)


@pytest.mark.parametrize("axis", ["x", "y", "z"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_projector_gap_dense_and_factored_agree(axis, k):
    dense = projector_gap(axis, k, dense=True)
    assert dense >= -1e-9
    assert projector_gap(axis, k, dense=False) == pytest.approx(dense, abs=1e-10)


@pytest.mark.parametrize("kind,k", [("binary", 1), ("binary", 2), ("binary", 3), ("ternary", 1), ("ternary", 3)])
def test_circuit_tester_reproduces_simulation(kind, k):
    c = build_binary_circuit(k) if kind == "binary" else build_ternary_circuit(k)
    T = circuit_to_tester(c)
    chk = T.check()
    assert chk["passed"], chk
    axes = {"X": "x", "Y": "y", "Z": "z"}
    for lab in c.labels:
        for t in np.linspace(0.05, 3.1, 6):
            U = rotation_gate(axes[lab], t)
            gp = guess_probabilities(c, axes[lab], [t])
            for guess in c.labels:
                assert T.probability(guess, U) == pytest.approx(gp[guess][0], abs=1e-8)


def test_tester_pairing_gives_average_success():
    T = circuit_to_tester(build_binary_circuit(1))
    ox, oz = performance_operator("x", 1), performance_operator("z", 1)
    assert T.pair("X", ox) + T.pair("Z", oz) == pytest.approx(1.5, abs=1e-12)
    T3 = circuit_to_tester(build_ternary_circuit(1))
    val = sum(T3.pair(a, performance_operator(a.lower(), 1)) for a in "XYZ") / 3
    assert val == pytest.approx(2 / 3, abs=1e-12)


def test_tester_budget():
    with pytest.raises(ResourceError):
        circuit_to_tester(build_binary_circuit(5))


def test_sdp_small_anchors():
    ox, oy, oz = (performance_operator(a, 1) for a in "xyz")
    r = solve_recognition_sdp([ox, oz])
    assert r.value == pytest.approx(0.75, abs=1e-4)
    assert r.witness_report().passed
    assert solve_recognition_sdp([oz, oz]).value == pytest.approx(0.5, abs=1e-6)
    assert solve_recognition_sdp([ox, oy, oz]).value == pytest.approx(2 / 3, abs=1e-4)


def test_sdp_unequal_priors_reduce_to_larger_prior():
    oz = performance_operator("z", 1)
    assert solve_recognition_sdp([oz, oz], priors=[0.8, 0.2]).value == pytest.approx(0.8, abs=1e-6)


def test_sdp_k2_gen_equals_seq():
    ox, oz = performance_operator("x", 2), performance_operator("z", 2)
    s = solve_recognition_sdp([ox, oz]).value
    g = solve_recognition_sdp([ox, oz], strategy="GEN").value
    assert s == pytest.approx(5 / 6, abs=1e-4)
    assert g == pytest.approx(s, abs=1e-4)


def test_sdp_rejects_bad_input():
    with pytest.raises(DomainError):
        solve_recognition_sdp([performance_operator("z", 1), performance_operator("z", 2)])
    with pytest.raises(ResourceError):
        solve_recognition_sdp([performance_operator("z", 4)] * 2)
    with pytest.raises(DomainError):
        solve_recognition_sdp([performance_operator("z", 1)] * 2, strategy="PAR")


def test_sweep_anchor_rows():
    rows = general_axis_sweep(1, alphas=[0.0, np.pi / 2])
    assert rows[0].optimal == pytest.approx(0.5, abs=1e-6)
    assert rows[0].fixed == pytest.approx(0.5, abs=1e-12)
    assert rows[1].optimal == pytest.approx(0.75, abs=1e-4)
    assert rows[1].fixed == pytest.approx(0.75, abs=1e-12)
    assert all(r.ordered for r in rows)
