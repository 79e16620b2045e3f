import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fadres.errors import DomainError, ResonanceSingularity
from fadres.threebody import (
    RHO_MIN,
    channel_matrix,
    effective_exchange,
    exchange_kernel,
    exchange_kernel_oracle,
    exchange_transform,
    exchange_transform_closed,
    faddeev_residuals,
    lambda_structure,
    m_amplitudes,
    m_matrix,
)
from fadres.twobody import TwoBodyDress, amplification

DESK_J = -0.03169 - 0.00329j


@pytest.mark.parametrize("rho, t0, expected", [
    (4.0, 0.0, 0.0),
    (2.0, 0.0, -math.exp(-2.0)),
    (2.85, 0.12, DESK_J),
])
def test_kernel_examples(rho, t0, expected):
    assert exchange_kernel(rho, t0) == pytest.approx(expected, abs=1e-5)


@pytest.mark.parametrize("t0", [0.01, 0.05, 0.1])
def test_kernel_far_tail(t0):
    rho = 50.0
    J = exchange_kernel(rho, t0)
    tail = -(2 / rho) * t0**2 * cmath.exp(1j * t0 * rho) / (1 + t0**2) ** 2
    assert abs(J) < 1e-2 * (2 / rho)
    assert abs(J - tail) < 1e-12 * abs(tail)


def test_kernel_rejects_tiny_rho():
    with pytest.raises(DomainError):
        exchange_kernel(0.5 * RHO_MIN, 0.1)


@settings(max_examples=200)
@given(st.floats(RHO_MIN, 100.0))
def test_kernel_real_at_zero_momentum(rho):
    assert exchange_kernel(rho, 0.0).imag == 0.0


@settings(max_examples=300)
@given(st.floats(5.0, 500.0), st.floats(0.0, 2.0))
def test_kernel_decays_like_inverse_rho(rho, t0):
    q = 1 + t0 * t0
    c = 7 * math.exp(-5.0) / q + 2 * (math.exp(-5.0) + t0 * t0) / q**2
    assert abs(exchange_kernel(rho, t0)) <= c / rho


def test_kernel_vectorized_matches_scalar():
    rho = np.linspace(1, 10, 7)
    t0 = np.linspace(0.05, 0.6, 5)[:, None]
    grid = exchange_kernel(rho, t0)
    assert grid.shape == (5, 7)
    assert grid[2, 3] == exchange_kernel(rho[3], float(t0[2, 0]))


# --- quadrature of the exchange integrand --------------------------------------

TRANSFORM_POINTS = [(1.0, 0.05), (1.5, 0.5), (2.0, 0.1), (3.0, 0.12), (5.0, 0.3),
                    (7.5, 0.6), (10.0, 0.3)]


@pytest.mark.parametrize("rho, t0", TRANSFORM_POINTS)
def test_transform_quadrature_matches_partial_fractions(rho, t0):
    exact = exchange_transform_closed(rho, t0)
    assert abs(exchange_transform(rho, t0) - exact) <= 1e-9 * max(abs(exact), 1e-3)


@pytest.mark.parametrize("rho, t0", TRANSFORM_POINTS)
def test_transform_outgoing_wave_matches_kernel(rho, t0):
    # the on-shell (imaginary) part is fixed by the pole and agrees with the kernel
    assert exchange_transform(rho, t0).imag == pytest.approx(exchange_kernel(rho, t0).imag, abs=1e-10)


def test_transform_low_momentum_limit():
    # at t0 -> 0 only the short-range term survives
    assert exchange_transform_closed(3.0, 1e-8) == pytest.approx(-math.exp(-3.0), abs=1e-12)


@pytest.mark.parametrize("fn", [exchange_kernel, exchange_transform])
def test_asymptotic_phase(fn):
    rho, t0 = 10.0, 0.3
    tail = -fn(rho, t0) * rho * (1 + t0**2) ** 2 / (2 * t0**2)
    expected = cmath.exp(1j * t0 * rho)
    assert abs(cmath.phase(tail / expected)) < 2e-3


def test_oracle_normalized_at_reference():
    assert exchange_kernel_oracle(2.0, 0.1) == pytest.approx(exchange_kernel(2.0, 0.1), rel=1e-12)


@pytest.mark.xfail(strict=True, reason="the one-point normalized transform differs from the "
                                       "closed-form kernel in its short-range terms")
@pytest.mark.parametrize("rho, t0", [(3.0, 0.12), (1.5, 0.5), (10.0, 0.3)])
def test_oracle_matches_kernel(rho, t0):
    exact = exchange_kernel(rho, t0)
    assert abs(exchange_kernel_oracle(rho, t0) - exact) <= 1e-5 * abs(exact)


# --- channel structure --------------------------------------------------------------

def test_lambda_structure_zero_diagonal():
    m = lambda_structure(0.3 + 0.1j)
    assert m[0, 0] == 0 and m[1, 1] == 0 and m[0, 1] == m[1, 0]
    with pytest.raises(DomainError):
        lambda_structure(0.3, diagonal=(0.1, 0))


def _dress(lam, t0):
    return amplification(lam, t0)


def test_channel_matrix_free_case():
    K = channel_matrix(2.0, 0.3, _dress(0.0, 0.3))
    assert np.all(K.as_array() == 0)


def test_channel_matrix_kernel_zero():
    K = channel_matrix(4.0, 0.0, _dress(-0.95, 0.0))
    assert np.allclose(K.as_array(), 0, atol=1e-17)


def test_channel_matrix_desk_value():
    dress = _dress(-0.95, 0.12)
    K = channel_matrix(2.85, 0.12, dress)
    J = exchange_kernel(2.85, 0.12)
    assert K[0, 0] == K[1, 1] == pytest.approx(J * J * dress.eta, rel=1e-14)
    assert K[0, 1] == 0 and K[1, 0] == 0
    assert K.swapped() == K


def test_m_free_case_is_born_exchange():
    m = m_amplitudes(2.0, 0.3, _dress(0.0, 0.3))
    assert m.m_plus == pytest.approx(exchange_kernel(2.0, 0.3), abs=1e-16)
    assert m.m_minus == 0


def test_m_vanishes_with_kernel():
    m = m_amplitudes(4.0, 0.0, _dress(-0.95, 0.0))
    assert abs(m.m_plus) < 1e-16 and abs(m.m_minus) < 1e-16


def test_m_desk_values():
    dress = _dress(-0.95, 0.12)
    m = m_amplitudes(2.85, 0.12, dress)
    J = m.kernel
    d = 1 - (J * dress.eta) ** 2
    assert abs(d) == pytest.approx(0.45, abs=0.05)
    assert m.m_plus * d == pytest.approx(J, rel=1e-10)
    assert m.m_minus * d == pytest.approx(J * J * dress.eta, rel=1e-10)


def test_effective_exchange_closed_form():
    dress = _dress(-0.95, 0.12)
    m = m_amplitudes(2.65, 0.12, dress)
    J = m.kernel
    assert 1 - J * dress.eta == pytest.approx(-0.1368 - 0.1833j, abs=1e-3)
    assert effective_exchange(m, dress) == pytest.approx(J / (1 - J * dress.eta), rel=1e-12)


def test_born_limit():
    dress = _dress(-0.5, 0.2)
    m = m_amplitudes(40.0, 0.01, dress)
    assert effective_exchange(m, dress) == pytest.approx(m.kernel, rel=1e-5)


@settings(max_examples=300, deadline=None)
@given(st.floats(-0.99, -0.5), st.floats(0.01, 0.6), st.floats(1.0, 30.0))
def test_faddeev_residuals(lam, t0, rho):
    dress = _dress(lam, t0)
    m = m_amplitudes(rho, t0, dress)
    assert max(faddeev_residuals(m, dress)) <= 1e-12
    J = m.kernel
    d = 1 - (J * dress.eta) ** 2
    if abs(d) > 1e-8:
        assert abs(m.m_plus * d - J) <= 1e-10 * max(1, abs(J))
        assert abs(m.m_minus * d - J * J * dress.eta) <= 1e-10 * max(1, abs(J * J * dress.eta))


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.99, 2.0), st.floats(0.01, 0.6), st.floats(1.0, 30.0))
def test_channel_swap_symmetry(lam, t0, rho):
    m = m_matrix(rho, t0, _dress(lam, t0))
    P = np.array([[0, 1], [1, 0]])
    np.testing.assert_array_equal(P @ m @ P, m)


def test_resonance_singularity_reported():
    # tune eta so that J eta = 1 exactly at this point
    rho, t0 = 2.7, 0.12
    J = exchange_kernel(rho, t0)
    eta = 1 / J
    dress = TwoBodyDress(loop=1 + 0j, eta=eta, coupling=None)
    with pytest.raises(ResonanceSingularity) as info:
        m_amplitudes(rho, t0, dress)
    assert info.value.rho == rho and info.value.t0 == t0
