import numpy as np
import pytest

from hamrec.sdp import SolverError, solve_block_sdp


def sym_basis(n):
    """Orthonormal basis of real symmetric n x n matrices."""
    out = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            if i == j:
                E[i, i] = 1.0
            else:
                E[i, j] = E[j, i] = 1 / np.sqrt(2)
            out.append(E)
    return np.array(out)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_largest_eigenvalue_problem(seed):
    # min t s.t. t I - C >= 0 has value lambda_max(C)
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(5, 5))
    C = A + A.T
    basis = np.eye(5)[None] / np.sqrt(5)
    res = solve_block_sdp(basis, np.array([1 / np.sqrt(5)]), [C])
    assert res.dual == pytest.approx(np.linalg.eigvalsh(C)[-1], abs=1e-6)
    assert abs(res.gap) <= 1e-7 * max(1.0, abs(res.dual))


def test_two_blocks_trace_objective():
    # min tr(V) s.t. V >= C1, V >= C2 over all symmetric V; two commuting
    # diagonal blocks give sum_i max(C1_ii, C2_ii)
    C1 = np.diag([1.0, -2.0, 0.5])
    C2 = np.diag([0.2, 0.3, 0.7])
    basis = sym_basis(3)
    c = np.array([np.trace(B) for B in basis])
    res = solve_block_sdp(basis, c, [C1, C2])
    assert res.dual == pytest.approx(1.0 + 0.3 + 0.7, abs=1e-6)


def test_against_cvxpy():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(7)
    n = 4
    blocks = []
    for _ in range(2):
        A = rng.normal(size=(n, n))
        blocks.append(A + A.T)
    basis = sym_basis(n)
    W = rng.normal(size=(n, n))
    weight = W @ W.T + np.eye(n)  # objective <weight, V>
    c = np.array([np.sum(weight * B) for B in basis])
    res = solve_block_sdp(basis, c, blocks)

    V = cp.Variable((n, n), symmetric=True)
    prob = cp.Problem(cp.Minimize(cp.trace(weight @ V)), [V - Cj >> 0 for Cj in blocks])
    prob.solve(solver=cp.SCS, eps=1e-9, max_iters=200_000)
    assert res.dual == pytest.approx(prob.value, abs=1e-4)


def test_nonconvergence_reports_history():
    basis = np.eye(3)[None] / np.sqrt(3)
    with pytest.raises(SolverError) as info:
        solve_block_sdp(basis, np.array([1 / np.sqrt(3)]), [np.diag([1.0, 2.0, 3.0])], max_iter=1)
    assert len(info.value.history) == 1
    assert "primal" in info.value.history[0]
