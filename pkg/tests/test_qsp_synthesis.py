import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_chebyu

from hamrec.qsp_synthesis import (
    ChebyshevTarget,
    LaurentPoly,
    PhaseSequence,
    SynthesisError,
    complete_partner,
    completion_residual,
    even_construction,
    evaluate_qsp,
    odd_target,
    roundtrip_error,
    synthesize,
)
from hamrec.quantum_core import DomainError


def kernel_oracle(k, theta):
    # U_k(cos t) / (k+1), evaluated through scipy's Chebyshev-U
    return eval_chebyu(k, np.cos(theta)) / (k + 1)


@pytest.mark.parametrize("k", [1, 3, 5, 9])
def test_odd_target_is_chebyshev_u(k):
    t = np.linspace(0.01, 3.1, 50)
    assert np.allclose(odd_target(k)(np.cos(t)), kernel_oracle(k, t), atol=1e-12)


def test_odd_target_rejects_even():
    with pytest.raises(DomainError):
        odd_target(4)


def test_chebyshev_target_checks():
    with pytest.raises(DomainError):
        ChebyshevTarget(2, (0.0, 1.0, 0.0))  # wrong parity for k = 2
    with pytest.raises(DomainError):
        ChebyshevTarget(1, (0.0, 1.5))  # exceeds 1 on [-1, 1]


def test_k1_canonical_phases():
    ph = synthesize(1)
    assert ph.phases == (0.0, 0.0)


def test_k3_partner_and_polynomial():
    P = odd_target(3)
    a = np.linspace(-1, 1, 11)
    assert np.allclose(P(a), 2 * a**3 - a)
    Q = complete_partner(P)
    # |Q(a)|^2 = 4 a^4 + 1, realized by Q = 2a^2 - i up to conjugation
    assert np.allclose(np.abs(Q(a)) ** 2, 4 * a**4 + 1)
    assert completion_residual(P, Q) < 1e-12


@pytest.mark.parametrize("k", [1, 3, 7, 15])
def test_odd_roundtrip_entry(k):
    ph = synthesize(k)
    for t in (0.2, 1.1, 2.5):
        assert evaluate_qsp(ph, t, "x")[0, 0] == pytest.approx(kernel_oracle(k, t), abs=1e-10)


@pytest.mark.parametrize("k", [2, 4, 6, 10])
def test_even_roundtrip(k):
    ph = synthesize(k)
    assert ph.convention == "even"
    assert len(ph.phases) == k // 2 + 1
    assert sum(ph.phases) == pytest.approx(-np.pi / 2, abs=1e-10)
    assert roundtrip_error(ph) < 1e-10


@pytest.mark.parametrize("k", [2, 4, 8, 16])
def test_even_construction_endpoints(k):
    e = even_construction(k)
    assert abs(e.P(1.0) - np.sqrt(2)) < 1e-9
    assert abs(e.Q(1.0)) < 1e-9
    assert e.P.is_real() and e.Q.is_real()


def test_even_construction_k2_coefficients():
    e = even_construction(2)
    # P P(1/z) = 1 + g and Q Q(1/z) = 1 - g with g = (z^-2 + 1 + z^2)/3
    z = np.exp(1j * np.linspace(0, 3, 7))
    g = (z**-2 + 1 + z**2) / 3
    assert np.allclose(e.P(z) * e.P(1 / z), 1 + g)
    assert np.allclose(e.Q(z) * e.Q(1 / z), 1 - g)


def test_even_z_slot_unitary():
    ph = synthesize(4)
    for t in (0.3, 1.9):
        M = evaluate_qsp(ph, t, "z")
        assert np.allclose(M.conj().T @ M, np.eye(2), atol=1e-12)


def test_phase_sequence_validation_and_json():
    with pytest.raises(DomainError):
        PhaseSequence(3, (0.0, 0.0))
    with pytest.raises(DomainError):
        PhaseSequence(2, (0.0, 0.0), "even")  # sum is not -pi/2
    ph = synthesize(5)
    back = PhaseSequence.from_json(ph.to_json())
    assert back == ph
    assert json.loads(ph.to_json())["convention"] == "odd"


def test_synthesize_rejects_nonpositive():
    with pytest.raises(DomainError):
        synthesize(0)


def test_synthesis_error_carries_step():
    err = SynthesisError("boom", step=4)
    assert err.step == 4


@settings(max_examples=40, deadline=None)
@given(st.integers(-3, 3), st.lists(st.floats(-2, 2), min_size=1, max_size=5),
       st.lists(st.floats(-2, 2), min_size=1, max_size=5), st.floats(0, 6.28))
def test_laurent_product_evaluates_pointwise(m1, c1, c2, t):
    a, b = LaurentPoly(m1, tuple(c1)), LaurentPoly(-1, tuple(c2))
    w = np.exp(1j * t)
    assert (a * b)(w) == pytest.approx(a(w) * b(w), abs=1e-9)
    assert (a + b)(w) == pytest.approx(a(w) + b(w), abs=1e-9)
    assert a.reflect()(w) == pytest.approx(a(1 / w), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([3, 5, 7, 9, 11]), st.floats(0, np.pi))
def test_odd_circuit_is_unitary_and_matches_target(k, t):
    ph = synthesize(k)
    M = evaluate_qsp(ph, t, "x")
    assert np.allclose(M.conj().T @ M, np.eye(2), atol=1e-10)
    assert M[0, 0] == pytest.approx(kernel_oracle(k, t), abs=1e-9)
