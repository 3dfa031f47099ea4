"""A small primal-dual interior-point solver for block SDPs.

Problem solved (the "dual" form used by recognition bounds)::

    minimize    c . y
    subject to  S_j = sum_i y_i B_i - C_j  >= 0      for j = 1..m

together with its conjugate problem::

    maximize    sum_j <C_j, X_j>
    subject to  sum_j <B_i, X_j> = c_i,   X_j >= 0.

All blocks share the basis {B_i} and the same size n.  The search direction
is HKM with a Mehrotra predictor-corrector step.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SolverError(RuntimeError):
    def __init__(self, message: str, history: list):
        super().__init__(message)
        self.history = history


@dataclass
class SDPResult:
    y: np.ndarray
    X: list
    S: list
    primal: float  # sum <C_j, X_j>
    dual: float  # c . y
    iterations: int
    history: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        return self.dual - self.primal


def _inner(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.real(np.vdot(A, B)))


def _max_step(M: np.ndarray, D: np.ndarray) -> float:
    """Largest alpha with M + alpha D still PSD (M positive definite)."""
    L = np.linalg.cholesky(M)
    Li = np.linalg.inv(L)
    T = Li @ D @ Li.conj().T
    lam = np.linalg.eigvalsh(0.5 * (T + T.conj().T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def solve_block_sdp(
    basis: np.ndarray,
    c: np.ndarray,
    C_blocks: list,
    gap_tol: float = 1e-7,
    feas_tol: float = 1e-7,
    max_iter: int = 200,
    y_identity: np.ndarray | None = None,
) -> SDPResult:
    """Solve the block SDP above.

    ``basis`` has shape (s, n, n).  ``y_identity`` (optional) gives
    coefficients with sum_i y_i B_i = I, used for a strictly feasible start.
    """
    basis = np.asarray(basis)
    c = np.asarray(c, dtype=float)
    s, n, _ = basis.shape
    m = len(C_blocks)
    dtype = np.result_type(basis.dtype, *[np.asarray(Cj).dtype for Cj in C_blocks])
    C_blocks = [np.asarray(Cj, dtype=dtype) for Cj in C_blocks]
    Bflat = basis.reshape(s, -1).astype(dtype)
    eye = np.eye(n, dtype=dtype)

    def A_of(y):
        return (y @ Bflat).reshape(n, n)

    def A_adj(Ms):
        return np.real(Bflat.conj() @ sum(Mj.reshape(-1) for Mj in Ms))

    gram = np.real(Bflat.conj() @ Bflat.T)
    orthonormal = np.abs(gram - np.eye(s)).max() <= 1e-12

    # starting point
    if y_identity is None:
        y_identity = np.linalg.lstsq(Bflat.T, eye.reshape(-1), rcond=None)[0].real
    tstart = 1.0 + max(np.linalg.norm(Cj, 2) for Cj in C_blocks)
    y = tstart * y_identity
    S = [A_of(y) - Cj for Cj in C_blocks]
    # X_j = xi I is primal feasible when c is supported on the identity direction
    ident_norm = np.sqrt(float(np.real(np.vdot(A_of(y_identity), eye))))
    X = [eye * (1.0 / (m * ident_norm)) for _ in range(m)]
    history = []

    for it in range(1, max_iter + 1):
        pobj = sum(_inner(Cj, Xj) for Cj, Xj in zip(C_blocks, X))
        dobj = float(c @ y)
        rp = c - A_adj(X)
        Ay = A_of(y)
        Rd = [Ay - Cj - Sj for Cj, Sj in zip(C_blocks, S)]
        mu = sum(_inner(Xj, Sj) for Xj, Sj in zip(X, S)) / (m * n)
        pinf = np.linalg.norm(rp) / (1 + np.linalg.norm(c))
        dinf = max(np.linalg.norm(R) for R in Rd) / (1 + tstart)
        history.append({"iter": it, "primal": pobj, "dual": dobj, "mu": mu, "pinf": pinf, "dinf": dinf})
        if abs(dobj - pobj) <= gap_tol * max(1.0, abs(dobj)) and pinf <= feas_tol and dinf <= feas_tol:
            return SDPResult(y, X, S, pobj, dobj, it, history)

        Sinv = [np.linalg.inv(Sj) for Sj in S]
        # Schur complement M_ik = sum_j <B_i, X_j B_k S_j^{-1}>
        M = np.zeros((s, s))
        for Xj, Sij in zip(X, Sinv):
            G = np.matmul(np.matmul(Xj[None], basis), Sij[None]).reshape(s, -1)
            M += np.real(Bflat.conj() @ G.T)
        M = 0.5 * (M + M.T)
        try:
            Mfac = np.linalg.cholesky(M)

            def msolve(r):
                return np.linalg.solve(Mfac.T.conj(), np.linalg.solve(Mfac, r))
        except np.linalg.LinAlgError:
            Mpinv = np.linalg.pinv(M, rcond=1e-14)

            def msolve(r):
                return Mpinv @ r

        def direction(sigma_mu, corr):
            terms = []
            for j in range(m):
                T = sigma_mu * Sinv[j] - X[j] @ Rd[j] @ Sinv[j]
                if corr is not None:
                    T = T - corr[0][j] @ corr[1][j] @ Sinv[j]
                terms.append(T)
            rhs = A_adj(terms) - c
            dy = msolve(rhs)
            Ady = A_of(dy)
            dS = [Ady + Rd[j] for j in range(m)]
            dX = []
            for j in range(m):
                D = terms[j] - X[j] - X[j] @ dS[j] @ Sinv[j]
                dX.append(0.5 * (D + D.conj().T))
            # round-off in X dS S^{-1} grows like 1/mu; push the step back onto
            # the affine set sum_j <B_i, X_j + dX_j> = c_i
            delta = c - A_adj(X) - A_adj(dX)
            if not orthonormal:
                delta = np.linalg.solve(gram, delta)
            fix = A_of(delta) / m
            dX = [D + fix for D in dX]
            return dy, dX, dS

        def steps(dX, dS, frac):
            ap = min([1.0] + [frac * _max_step(X[j], dX[j]) for j in range(m)])
            ad = min([1.0] + [frac * _max_step(S[j], dS[j]) for j in range(m)])
            return ap, ad

        try:
            # predictor
            dy, dX, dS = direction(0.0, None)
            ap, ad = steps(dX, dS, 1.0)
            mu_aff = sum(_inner(X[j] + ap * dX[j], S[j] + ad * dS[j]) for j in range(m)) / (m * n)
            sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
            # corrector
            dy, dX, dS = direction(sigma * mu, (dX, dS))
            ap, ad = steps(dX, dS, 0.98)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"iterate lost definiteness at step {it}: {exc}", history) from exc
        X = [X[j] + ap * dX[j] for j in range(m)]
        y = y + ad * dy
        S = [S[j] + ad * dS[j] for j in range(m)]
        S = [0.5 * (Sj + Sj.conj().T) for Sj in S]

    raise SolverError(f"no convergence in {max_iter} iterations", history)
