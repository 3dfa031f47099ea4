"""Phase synthesis for the recognition polynomials.

Two conventions are produced here.

* ``"odd"``: Z-phases psi_0..psi_k with
  QSP(theta) = e^{iZ psi_0} prod_j e^{-iH theta} e^{iZ psi_j}.
  For H = X the top-left entry is P(cos theta).
* ``"even"``: X-phases phi_0..phi_n (k = 2n) of the reflected circuit
  R_x(phi_0) prod_{j=1..n}[S R_x(phi_j)] R_z(pi) R_x(-phi_n) prod_{j=n-1..0}[S R_x(-phi_j)]
  with slot S = e^{-iH theta}, and sum(phi) = -pi/2.

Completion and layer stripping run in numpy extended precision
(``np.longdouble``).  Plain double precision loses the cancellation check
beyond roughly twenty layers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import polynomial as nppoly

from .quantum_core import I2, HADAMARD, X, Z, DomainError, as_hamiltonian, rx, rz

LD = np.longdouble
CLD = np.clongdouble

STRIP_TOL = 1e-10
COMPLETION_TOL = 1e-9

_PROJ_PLUS = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=CLD)
_PROJ_MINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=CLD)


class SynthesisError(RuntimeError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


# --------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class ChebyshevTarget:
    k: int
    coeffs: tuple

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if self.k < 1 or c.shape != (self.k + 1,):
            raise DomainError("coeffs must have length k+1")
        if c[self.k] == 0:
            raise DomainError("leading Chebyshev coefficient is zero")
        wrong = c[(self.k + 1) % 2 :: 2]
        if np.any(wrong != 0):
            raise DomainError("coefficients of the wrong parity must be exactly zero")
        grid = np.linspace(-1, 1, 1001)
        if np.abs(npcheb.chebval(grid, c)).max() > 1 + 1e-10:
            raise DomainError("target exceeds 1 in modulus on [-1, 1]")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))

    def __call__(self, a):
        return npcheb.chebval(a, np.asarray(self.coeffs))

    def laurent(self) -> "LaurentPoly":
        """Coefficients in w with a = (w + 1/w)/2, powers -k..k."""
        return LaurentPoly(-self.k, _cheb_to_laurent(np.asarray(self.coeffs)))


@dataclass(frozen=True, eq=False)
class LaurentPoly:
    """sum_m coeffs[m - min_power] w^m."""

    min_power: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        nz = np.flatnonzero(c)
        lo = int(self.min_power)
        if nz.size == 0:
            c, lo = np.zeros(1, dtype=complex), 0
        else:
            lo += int(nz[0])
            c = c[nz[0] : nz[-1] + 1]
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "min_power", lo)

    @property
    def max_power(self) -> int:
        return self.min_power + len(self.coeffs) - 1

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        return nppoly.polyval(w, self.coeffs) * w ** float(self.min_power)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        lo = min(self.min_power, other.min_power)
        hi = max(self.max_power, other.max_power)
        out = np.zeros(hi - lo + 1, dtype=complex)
        out[self.min_power - lo : self.max_power - lo + 1] += self.coeffs
        out[other.min_power - lo : other.max_power - lo + 1] += other.coeffs
        return LaurentPoly(lo, out)

    def __neg__(self):
        return LaurentPoly(self.min_power, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            return LaurentPoly(self.min_power + other.min_power, np.convolve(self.coeffs, other.coeffs))
        return LaurentPoly(self.min_power, self.coeffs * other)

    __rmul__ = __mul__

    def reflect(self) -> "LaurentPoly":
        """P(1/w)."""
        return LaurentPoly(-self.max_power, self.coeffs[::-1])

    def shift(self, m: int) -> "LaurentPoly":
        return LaurentPoly(self.min_power + m, self.coeffs)

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(self.coeffs.imag).max() <= tol)

    def max_abs(self) -> float:
        return float(np.abs(self.coeffs).max())


@dataclass(frozen=True)
class PhaseSequence:
    k: int
    phases: tuple
    convention: str = "odd"

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=float)
        if self.convention not in ("odd", "even"):
            raise DomainError(f"unknown convention {self.convention!r}")
        if not np.all(np.isfinite(ph)):
            raise DomainError("phases must be finite")
        expected = self.k + 1 if self.convention == "odd" else self.k // 2 + 1
        if len(ph) != expected:
            raise DomainError(f"{self.convention} convention needs {expected} phases, got {len(ph)}")
        if self.convention == "even":
            if self.k % 2:
                raise DomainError("even convention needs even k")
            if abs(ph.sum() + np.pi / 2) > 1e-10:
                raise DomainError("even-convention phases must sum to -pi/2")
        object.__setattr__(self, "phases", tuple(float(v) for v in ph))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.phases)

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "convention": self.convention, "phases": list(self.phases)})

    @classmethod
    def from_json(cls, text: str) -> "PhaseSequence":
        d = json.loads(text)
        return cls(int(d["k"]), tuple(d["phases"]), d["convention"])


@dataclass(eq=False)
class Partner:
    """Q(a) = alpha * a^parity * prod_i (a^2 - u_i)."""

    k: int
    parity: int
    alpha: float
    u: np.ndarray = field(repr=False)  # extended-precision complex roots in a^2

    def __call__(self, a):
        a = np.asarray(a, dtype=CLD)
        val = np.full(a.shape, LD(self.alpha), dtype=CLD) * a**self.parity
        for ui in self.u:
            val = val * (a * a - ui)
        return val.astype(complex)

    def power_coeffs(self) -> np.ndarray:
        """Ascending monomial coefficients of Q."""
        c = np.array([self.alpha], dtype=complex)
        if self.parity:
            c = np.convolve(c, [0, 1])
        for ui in self.u.astype(complex):
            c = np.convolve(c, [-ui, 0, 1])
        return c

    def laurent_ld(self) -> np.ndarray:
        """Coefficients in w (powers -(k-1)..k-1) as clongdouble."""
        c = np.array([self.alpha], dtype=CLD)
        if self.parity:
            c = np.convolve(c, np.array([0.5, 0, 0.5], dtype=CLD))
        q = LD(1) / 4
        for ui in self.u:
            c = np.convolve(c, np.array([q, 0, LD(1) / 2 - ui, 0, q], dtype=CLD))
        return c


# --------------------------------------------------------------------------
# targets


def _cheb_to_laurent(c: np.ndarray) -> np.ndarray:
    k = len(c) - 1
    out = np.zeros(2 * k + 1, dtype=c.dtype if np.iscomplexobj(c) else float)
    out[k] = c[0]
    for l in range(1, k + 1):
        out[k + l] += c[l] / 2
        out[k - l] += c[l] / 2
    return out


def odd_target(k: int) -> ChebyshevTarget:
    """P_k(a) = 2/(k+1) * sum over odd l <= k of T_l(a)."""
    if k < 1 or k % 2 == 0:
        raise DomainError("odd_target needs odd k >= 1; use even_construction for even k")
    c = np.zeros(k + 1)
    c[1::2] = 2.0 / (k + 1)
    return ChebyshevTarget(k, tuple(c))


# --------------------------------------------------------------------------
# completion


def _pair_select(nu: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Keep one root from each reciprocal pair: inside the disk, ties by Im > 0."""
    r = np.abs(nu)
    inside = nu[r < 1 - tol]
    on = nu[np.abs(r - 1) <= tol]
    ties = on[on.imag > tol]
    flat = np.sort_complex(on[np.abs(on.imag) <= tol])
    return np.concatenate([inside, ties, flat[::2]])


def _conj_select(u: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Keep one root from each conjugate pair of u (real roots: every other)."""
    scale = np.maximum(1.0, np.abs(u))
    cplx = u[u.imag > tol * scale]
    real = np.sort(u[np.abs(u.imag) <= tol * scale].real)
    return np.concatenate([cplx, real[::2].astype(complex)])


def _newton_polish(t: np.ndarray, c: np.ndarray, iters: int = 6) -> np.ndarray:
    """Refine zeros of 1 - P(cos t)^2 in extended precision."""
    c = c.astype(LD)
    l = np.arange(len(c)).astype(LD)
    t = t.astype(CLD)
    for _ in range(iters):
        arg = np.outer(t, l)
        P = np.cos(arg) @ c
        dP = -(np.sin(arg) * l) @ c
        g = 1 - P * P
        dg = -2 * P * dP
        ok = np.abs(dg) > 0
        step = np.zeros_like(t)
        step[ok] = g[ok] / dg[ok]
        tn = t - step
        Pn = np.cos(np.outer(tn, l)) @ c
        better = np.abs(1 - Pn * Pn) <= np.abs(g)
        t = np.where(better, tn, t)
    return t


def complete_partner(P: ChebyshevTarget) -> Partner:
    """Find Q with |P(a)|^2 + (1 - a^2)|Q(a)|^2 = 1 and parity k-1."""
    k = P.k
    c = np.asarray(P.coeffs)
    p = _cheb_to_laurent(c)
    A = -np.convolve(p, p)
    A[2 * k] += 1.0
    Av = A[::2]  # only even powers of w survive; v = w^2, powers -k..k
    qv, rem = nppoly.polydiv(Av, np.array([1.0, -2.0, 1.0]))
    if np.abs(rem).max() > 1e-9 * max(1.0, np.abs(Av).max()):
        raise SynthesisError("1 - P^2 is not divisible by (1 - a^2)")
    parity = (k - 1) % 2
    if parity:
        qv, rem = nppoly.polydiv(qv, np.array([1.0, 2.0, 1.0]))
        if np.abs(rem).max() > 1e-9 * max(1.0, np.abs(Av).max()):
            raise SynthesisError("odd partner needs a double zero of (1 - P^2)/(1 - a^2) at a = 0")
    nfactors = (k - 1 - parity) // 2
    if nfactors == 0:
        u_ld = np.zeros(0, dtype=CLD)
    else:
        nu = np.roots(qv[::-1])
        if not np.all(np.isfinite(nu)):
            raise SynthesisError("root finder failed")
        nu = _pair_select(nu)
        u = _conj_select((nu + 2 + 1 / nu) / 4)
        if len(u) != nfactors:
            raise SynthesisError(f"expected {nfactors} partner roots, found {len(u)}")
        t = np.arccos(np.sqrt(u.astype(complex)))
        t = _newton_polish(t, c)
        cos_t = np.cos(t)
        u_ld = cos_t * cos_t
    partner = Partner(k, parity, 1.0, u_ld)
    # scale from the identity itself on an interior grid
    a = np.linspace(-0.95, 0.95, 401)
    Pa = npcheb.chebval(a, c)
    q_unit = np.abs(partner(a)) ** 2
    alpha2 = np.sum((1 - Pa**2) / (1 - a**2)) / np.sum(q_unit)
    partner.alpha = float(np.sqrt(alpha2))
    if completion_residual(P, partner) > COMPLETION_TOL:
        raise SynthesisError(f"completion residual {completion_residual(P, partner):.3e} above tolerance")
    return partner


def completion_residual(P: ChebyshevTarget, Q: Partner, points: int = 1001) -> float:
    a = np.linspace(-1, 1, points)
    return float(np.abs(np.abs(P(a)) ** 2 + (1 - a**2) * np.abs(Q(a)) ** 2 - 1).max())


# --------------------------------------------------------------------------
# layer stripping


def _strip(C: np.ndarray, tol: float = STRIP_TOL) -> np.ndarray:
    """Peel e^{iZ psi} S(w) layers off a Laurent matrix polynomial.

    ``C`` has shape (2d+1, 2, 2) holding powers -d..d of
    e^{iZ psi_0} prod_j S(w) e^{iZ psi_j}, S(w) = w Pi_+ + w^{-1} Pi_-.
    Returns psi_0..psi_d.
    """
    C = np.asarray(C, dtype=CLD)
    d = (len(C) - 1) // 2
    psis = []
    step = 0
    while d > 0:
        top, bot = C[-1], C[0]
        if np.abs(top).max() >= np.abs(bot).max():
            row = top[np.argmax(np.abs(top).sum(axis=1))]
            ratio = row[0] / row[1]
        else:
            row = bot[np.argmax(np.abs(bot).sum(axis=1))]
            ratio = -row[0] / row[1]
        psi = np.angle(ratio) / 2
        phase = np.exp(-1j * psi)
        Zinv = np.array([[phase, 0], [0, np.conj(phase)]], dtype=CLD)
        CZ = C @ Zinv
        # multiply by S(w)^{-1} = w^{-1} Pi_+ + w Pi_-
        new = np.zeros((2 * d + 3, 2, 2), dtype=CLD)
        new[:-2] += CZ @ _PROJ_PLUS
        new[2:] += CZ @ _PROJ_MINUS
        scale = np.abs(new).max()
        edge = max(np.abs(new[0]).max(), np.abs(new[-1]).max(), np.abs(new[1]).max(), np.abs(new[-2]).max())
        if edge > tol * scale:
            raise SynthesisError(f"degree did not drop: residual {float(edge / scale):.3e}", step)
        C = new[2:-2]
        psis.append(float(psi))
        d -= 1
        step += 1
    c0 = C[0]
    if abs(c0[0, 1]) + abs(c0[1, 0]) > 1e-8:
        raise SynthesisError("final layer is not diagonal", step)
    psis.append(float(np.angle(c0[0, 0])))
    return np.array(psis[::-1])


def qsp_matrix_coeffs(P: ChebyshevTarget, Q: Partner) -> np.ndarray:
    """Laurent coefficients of [[P, iQ s], [iQ* s, P*]] with s = (w - 1/w)/2i."""
    k = P.k
    p = _cheb_to_laurent(np.asarray(P.coeffs)).astype(CLD)
    q = Q.laurent_ld()
    s = np.array([-1, 0, 1], dtype=CLD) / CLD(2j)
    C = np.zeros((2 * k + 1, 2, 2), dtype=CLD)
    C[:, 0, 0] = p
    C[:, 0, 1] = 1j * np.convolve(q, s)
    C[:, 1, 0] = 1j * np.convolve(np.conj(q), s)
    C[:, 1, 1] = np.conj(p)
    return C


def layer_strip(P: ChebyshevTarget, Q: Partner) -> PhaseSequence:
    if Q.k != P.k:
        raise DomainError("target and partner degrees differ")
    if completion_residual(P, Q) > COMPLETION_TOL:
        raise SynthesisError("pair violates the completion identity")
    psi = _strip(qsp_matrix_coeffs(P, Q))
    return PhaseSequence(P.k, tuple(psi), "odd")


# --------------------------------------------------------------------------
# evaluation


def evaluate_qsp(phases: PhaseSequence, theta: float, signal_axis="x") -> np.ndarray:
    """2x2 matrix of the phase circuit with slot e^{-iH theta}."""
    H = as_hamiltonian(signal_axis).matrix
    S = np.cos(theta) * I2 - 1j * np.sin(theta) * H
    ph = phases.array
    if phases.convention == "odd":
        M = np.diag([np.exp(1j * ph[0]), np.exp(-1j * ph[0])])
        for p in ph[1:]:
            M = M @ S @ np.diag([np.exp(1j * p), np.exp(-1j * p)])
        return M
    n = len(ph) - 1
    M = rx(ph[0])
    for j in range(1, n + 1):
        M = M @ S @ rx(ph[j])
    M = M @ rz(np.pi) @ rx(-ph[n])
    for j in range(n - 1, -1, -1):
        M = M @ S @ rx(-ph[j])
    return M


def roundtrip_error(phases: PhaseSequence, points: int = 1001) -> float:
    """Sup-norm distance between the evaluated circuit and its target."""
    k = phases.k
    theta = np.linspace(0, np.pi, points)
    if phases.convention == "odd":
        target = odd_target(k)
        vals = np.array([evaluate_qsp(phases, t, "x")[0, 0] for t in theta])
        return float(np.abs(vals - target(np.cos(theta))).max())
    g = LaurentPoly(-k, _even_kernel(k))
    vals = np.array([evaluate_qsp(phases, t, "z")[1, 0] for t in theta])
    return float(np.abs(vals - g(np.exp(1j * theta))).max())


# --------------------------------------------------------------------------
# even k


def _even_kernel(k: int) -> np.ndarray:
    """(1/(k+1)) sum over even l in -k..k of z^l, powers -k..k."""
    g = np.zeros(2 * k + 1)
    g[0::2] = 1.0 / (k + 1)
    return g


@dataclass(frozen=True, eq=False)
class EvenFactorization:
    k: int
    P: LaurentPoly  # polynomial in z, powers 0..k
    Q: LaurentPoly
    F: LaurentPoly  # z^{-n}(P + Q)/2
    G: LaurentPoly  # z^{-n}(P - Q)/2
    H: LaurentPoly
    L: LaurentPoly


def _check_quadruples(roots: np.ndarray, tol: float = 1e-8) -> float:
    worst = 0.0
    for r in roots:
        scale = max(1.0, abs(r))
        for partner in (np.conj(r), 1 / r, 1 / np.conj(r)):
            worst = max(worst, float(np.min(np.abs(roots - partner))) / scale)
    if worst > tol:
        raise SynthesisError(f"roots do not pair into quadruples (residual {worst:.3e})")
    return worst


def _half_factor(ycoeffs: np.ndarray, count: int) -> np.ndarray:
    """Roots zeta with |zeta| > 1, Im zeta > 0 of a polynomial in y = z^2.

    Companion-matrix roots are refined by Newton steps in extended precision.
    """
    y = np.roots(np.asarray(ycoeffs, dtype=float)[::-1])
    if not np.all(np.isfinite(y)):
        raise SynthesisError("root finder failed")
    cy = np.asarray(ycoeffs, dtype=LD)
    dcy = nppoly.polyder(cy)
    y = y.astype(CLD)
    for _ in range(4):
        y = y - nppoly.polyval(y, cy) / nppoly.polyval(y, dcy)
    z = np.sqrt(y)
    allz = np.concatenate([z, -z])
    _check_quadruples(allz.astype(complex))
    sel = allz[(np.abs(allz) > 1) & (allz.imag > 0)]
    if len(sel) != count:
        raise SynthesisError(f"expected {count} roots outside the unit circle, found {len(sel)}")
    return sel


def _even_factors_ld(k: int):
    """P, Q of the even construction as extended-precision real coefficient arrays."""
    n = k // 2
    g = np.zeros(2 * k + 1, dtype=LD)
    g[0::2] = LD(1) / (k + 1)
    Hc = g.copy()
    Hc[k] += 1
    Lc = -g
    Lc[k] += 1
    zeta = _half_factor(Hc[::2], n)
    P = np.array([1], dtype=LD)
    for z in zeta:
        P = np.convolve(P, np.array([abs(z) ** 2, -2 * z.real, 1], dtype=LD))
    P = P / np.sqrt((k + 1) * np.prod(np.abs(zeta) ** 2))
    ly, rem = nppoly.polydiv(Lc[::2].astype(float), np.array([1.0, -2.0, 1.0]))
    if np.abs(rem).max() > 1e-9:
        raise SynthesisError("double zeros of L at z = +-1 not found")
    Q = np.array([-1, 0, 1], dtype=LD)
    norm = LD(k + 1)
    if n > 1:
        # exact deflation of (y - 1)^2 in extended precision
        ly_ld = _deflate_double_one(Lc[::2])
        eta = _half_factor(ly_ld, n - 1)
        for z in eta:
            Q = np.convolve(Q, np.array([abs(z) ** 2, -2 * z.real, 1], dtype=LD))
        norm = norm * np.prod(np.abs(eta) ** 2)
    Q = Q / np.sqrt(norm)
    return P, Q, Hc, Lc


def _deflate_double_one(c: np.ndarray) -> np.ndarray:
    """Divide an ascending coefficient array by (y - 1)^2 using synthetic division."""
    out = np.asarray(c, dtype=LD)
    for _ in range(2):
        desc = out[::-1]
        q = np.zeros(len(desc) - 1, dtype=LD)
        acc = LD(0)
        for i in range(len(desc) - 1):
            acc = acc + desc[i]
            q[i] = acc
        out = q[::-1]
    return out


def even_construction(k: int) -> EvenFactorization:
    if k < 2 or k % 2:
        raise DomainError("even_construction needs even k >= 2")
    n = k // 2
    P, Q, Hc, Lc = _even_factors_ld(k)
    Pl, Ql = LaurentPoly(0, P.astype(float)), LaurentPoly(0, Q.astype(float))
    Hl, Ll = LaurentPoly(-k, Hc.astype(float)), LaurentPoly(-k, Lc.astype(float))
    for lhs, rhs, name in ((Pl * Pl.reflect(), Hl, "P"), (Ql * Ql.reflect(), Ll, "Q")):
        if (lhs - rhs).max_abs() > 1e-8:
            raise SynthesisError(f"{name} factorization residual {(lhs - rhs).max_abs():.3e}")
    F = ((Pl + Ql) * 0.5).shift(-n)
    G = ((Pl - Ql) * 0.5).shift(-n)
    return EvenFactorization(k, Pl, Ql, F, G, Hl, Ll)


def even_phase_sequence(k: int) -> PhaseSequence:
    even_construction(k)  # runs the factorization checks
    n = k // 2
    P, Q, _, _ = _even_factors_ld(k)
    F = (P + Q) / 2  # index m holds the power m - n
    G = (P - Q) / 2
    # B(w) = [[F(w), iG(w)], [iG(1/w), F(1/w)]], conjugated into Z-phase form
    C = np.zeros((2 * n + 1, 2, 2), dtype=CLD)
    C[:, 0, 0] = F
    C[:, 0, 1] = 1j * G
    C[:, 1, 0] = 1j * G[::-1]
    C[:, 1, 1] = F[::-1]
    Hd = HADAMARD.astype(CLD)
    C = np.einsum("ab,pbc,cd->pad", Hd, C, Hd)
    # the Rx(theta) signal equals S(1/omega), so reverse the powers
    psi = _strip(C[::-1])
    phi = -2.0 * psi
    shift = -np.pi / 2 - phi.sum()
    turns = shift / (2 * np.pi)
    if abs(turns - round(turns)) > 1e-8:
        raise SynthesisError(f"phase sum {phi.sum():.12f} is not -pi/2 modulo 2pi")
    phi[0] += 2 * np.pi * round(turns)
    return PhaseSequence(k, tuple(phi), "even")


def synthesize(k: int) -> PhaseSequence:
    """Phases for the k-query recognition protocol."""
    if k < 1:
        raise DomainError("k must be positive")
    if k % 2:
        P = odd_target(k)
        return layer_strip(P, complete_partner(P))
    return even_phase_sequence(k)
