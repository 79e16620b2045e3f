import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fadres.errors import DomainError
from fadres.units import (
    PhysicalScale,
    distance_to_rho,
    momentum_to_t0,
    pretty_length,
    rho_to_distance,
    t0_to_momentum,
)

betas = st.floats(1e-30, 1e10)


@pytest.mark.parametrize("rho, beta, r", [
    (2.5, 1e-22, 2.5e22),
    (1.0, 1.0, 1.0),
    (2.65, 1e-22, 2.65e22),
])
def test_rho_to_distance(rho, beta, r):
    dist = rho_to_distance(rho, PhysicalScale(beta))
    assert dist.r_cm == r
    assert dist.d_cm == 2 * r


@pytest.mark.parametrize("t0, beta, p0", [
    (0.1, 1e-22, 1e-23),
    (0.0, 1e-22, 0.0),
    (0.12, 1e-22, 1.2e-23),
])
def test_t0_to_momentum(t0, beta, p0):
    assert t0_to_momentum(t0, beta) == p0


@settings(max_examples=500)
@given(st.floats(1e-6, 1e6), betas)
def test_distance_round_trip(rho, beta):
    back = distance_to_rho(rho_to_distance(rho, beta).r_cm, beta)
    assert back == pytest.approx(rho, rel=1e-14)


@settings(max_examples=500)
@given(st.just(0.0) | st.floats(1e-200, 1e3), betas)
def test_momentum_round_trip_and_positivity(t0, beta):
    p0 = t0_to_momentum(t0, beta)
    assert p0 >= 0
    assert momentum_to_t0(p0, beta) == pytest.approx(t0, rel=1e-14)


@pytest.mark.parametrize("beta", [0.0, -1e-22, math.inf, math.nan])
def test_scale_validation(beta):
    with pytest.raises(DomainError):
        PhysicalScale(beta)


def test_negative_inputs_rejected():
    with pytest.raises(DomainError):
        rho_to_distance(-1.0, 1.0)
    with pytest.raises(DomainError):
        t0_to_momentum(-0.1, 1.0)


@pytest.mark.parametrize("cm, unit", [(2.5e22, "kpc"), (1e26, "Mpc"), (1e19, "pc"), (10.0, "cm")])
def test_pretty_length(cm, unit):
    assert unit in pretty_length(cm)
