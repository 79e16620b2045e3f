"""Enhancement factor of the heavy-heavy interaction and its t0-average.

``xi = 1 + I(t0) eta_i (delta_ij + M_ij eta_j)`` leaves the channel indices
open. Three contractions are offered:

``summed``        sum over ``j``: ``1 + I eta / (1 - J eta)`` (default)
``diagonal``      ``i = j``:      ``1 + I eta / (1 - J^2 eta^2)``
``off_diagonal``  ``i != j``:     ``1 + I eta^2 J / (1 - J^2 eta^2)``
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvergence, ResonanceSingularity, SingularPath
from .numerics import QuadratureSpec, integrate_adaptive
from .threebody import SINGULAR_DET, exchange_kernel, m_matrix
from .twobody import Coupling, _coupling, amplification, eta_values

DEFAULT_INTERVAL = (0.001, 0.6)


class Variant(str, enum.Enum):
    SUMMED = "summed"
    DIAGONAL = "diagonal"
    OFF_DIAGONAL = "off_diagonal"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        aliases = {"offdiag": "off_diagonal", "off-diagonal": "off_diagonal"}
        try:
            return cls(aliases.get(value, value))
        except ValueError:
            raise DomainError(f"unknown variant {value!r}") from None


class Regime(str, enum.Enum):
    AMPLIFIED_ATTRACTION = "amplified_attraction"
    SUPPRESSED = "suppressed"
    REPULSIVE = "repulsive"


@dataclass(frozen=True)
class EnhancementFactor:
    value: complex
    variant: Variant
    lambda_dh: float
    t0: float
    rho: float


@dataclass(frozen=True)
class AggregateFactor:
    value: complex
    t0_interval: tuple[float, float]
    excluded_t0: list = field(default_factory=list)


def xi_values(lambda_dh: float, t0, rho, variant=Variant.SUMMED):
    """Vectorized closed-form ``xi`` and the variant's resonance denominator.

    Returns ``(xi, denom)`` broadcast over ``t0`` and ``rho``. Where the
    denominator is numerically zero (``|denom|^2 < 1e-14``) or ``eta`` hits a
    pole, ``xi`` is NaN; callers flag those samples.
    """
    variant = Variant.parse(variant)
    t0 = np.asarray(t0, dtype=float)
    loop, eta = eta_values(lambda_dh, t0)
    jeta = exchange_kernel(rho, t0) * eta
    if variant is Variant.SUMMED:
        denom = 1.0 - jeta
        numer = loop * eta
    else:
        denom = 1.0 - jeta * jeta
        numer = loop * eta if variant is Variant.DIAGONAL else loop * eta * jeta
    singular = ~(np.abs(denom) ** 2 >= SINGULAR_DET)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = np.where(singular, np.nan + 0j, 1.0 + numer / np.where(singular, 1.0, denom))
    return xi, denom


def xi(c, t0: float, rho: float, variant=Variant.SUMMED) -> EnhancementFactor:
    """Enhancement factor at one point through the explicit channel contraction."""
    c = _coupling(c)
    variant = Variant.parse(variant)
    dress = amplification(c, t0)
    value = xi_contracted(dress, t0, rho, variant)
    return EnhancementFactor(value, variant, c.lambda_dh, float(t0), float(rho))


def xi_contracted(dress, t0: float, rho: float, variant) -> complex:
    """``1 + I [diag(eta) (1 + M diag(eta))]_ij`` contracted per variant."""
    try:
        m = m_matrix(rho, t0, dress)
    except ResonanceSingularity as exc:
        raise ResonanceSingularity(f"xi singular at t0={t0}, rho={rho}: {exc}", t0=t0, rho=rho) from exc
    eta = np.diag([dress.eta, dress.eta])
    x = eta @ (np.eye(2) + m @ eta)
    if variant is Variant.SUMMED:
        s = x[0, 0] + x[0, 1]
    elif variant is Variant.DIAGONAL:
        s = x[0, 0]
    else:
        s = x[0, 1]
    return complex(1.0 + dress.loop * s)


def classify(factor) -> Regime:
    """Regime from ``Re xi``: above 1 amplified, below 0 repulsive, else suppressed."""
    value = factor.value if isinstance(factor, EnhancementFactor) else complex(factor)
    if not math.isfinite(abs(value)):
        raise DomainError("cannot classify a non-finite xi")
    if value.real > 1:
        return Regime.AMPLIFIED_ATTRACTION
    if value.real < 0:
        return Regime.REPULSIVE
    return Regime.SUPPRESSED


def big_xi(c, rho: float, interval=DEFAULT_INTERVAL, spec: QuadratureSpec | None = None,
           variant=Variant.SUMMED, normalize: bool = True) -> AggregateFactor:
    """Average of ``xi`` over ``t0`` in ``interval`` by adaptive quadrature.

    With ``normalize=False`` the plain integral is returned instead of the
    mean. Quadrature nodes where ``xi`` is singular contribute zero and are
    listed in ``excluded_t0``; if the quadrature then fails to converge,
    :class:`SingularPath` carries those nodes.
    """
    c = _coupling(c)
    variant = Variant.parse(variant)
    a, b = map(float, interval)
    if not 0 < a < b:
        raise DomainError("t0 interval must satisfy 0 < a < b")
    if c.lambda_dh == 0:
        return AggregateFactor(1 + 0j if normalize else complex(b - a), (a, b), [])
    spec = spec or QuadratureSpec(abs_tol=1e-10, rel_tol=1e-8, max_subdivisions=20000)
    excluded = []

    def integrand(t):
        values, _ = xi_values(c.lambda_dh, t, rho, variant)
        bad = ~np.isfinite(values)
        if np.any(bad):
            excluded.extend(float(v) for v in t[bad])
            values = np.where(bad, 0j, values)
        return values

    try:
        total = integrate_adaptive(integrand, a, b, spec)
    except NonConvergence as exc:
        if excluded:
            raise SingularPath(f"singular t0 nodes on the path at rho={rho}", sorted(set(excluded))) from exc
        raise
    value = total / (b - a) if normalize else total
    return AggregateFactor(value, (a, b), sorted(set(excluded)))


__all__ = [
    "AggregateFactor", "Coupling", "DEFAULT_INTERVAL", "EnhancementFactor", "Regime",
    "Variant", "big_xi", "classify", "xi", "xi_contracted", "xi_values",
]
