"""Conversion between dimensionless (t0, rho) and CGS momenta and distances.

Products and quotients are formed in decimal arithmetic on the shortest
``repr`` of each input and rounded once, so decimal inputs such as
``t0=0.1, beta=1e-22`` give ``1e-23`` rather than ``1.0000000000000001e-23``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

from .errors import DomainError

CM_PER_PARSEC = 3.0856775814913673e18
CM_PER_LIGHT_YEAR = 9.4607304725808e17


@dataclass(frozen=True)
class PhysicalScale:
    """Inverse-length potential parameter ``beta`` in 1/cm."""

    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise DomainError("beta must be positive and finite")


@dataclass(frozen=True)
class Distance:
    r_cm: float  # half separation
    d_cm: float  # separation between the bodies


def _scale(s) -> PhysicalScale:
    return s if isinstance(s, PhysicalScale) else PhysicalScale(float(s))


def _mul(x: float, y: float) -> float:
    with localcontext() as ctx:
        ctx.prec = 40
        return float(Decimal(repr(float(x))) * Decimal(repr(float(y))))


def _div(x: float, y: float) -> float:
    with localcontext() as ctx:
        ctx.prec = 40
        return float(Decimal(repr(float(x))) / Decimal(repr(float(y))))


def rho_to_distance(rho: float, scale) -> Distance:
    """``r = rho / beta`` and ``d = 2 r``."""
    scale = _scale(scale)
    if not rho >= 0:
        raise DomainError("rho must be non-negative")
    r = _div(rho, scale.beta)
    return Distance(r, _mul(2, r))


def distance_to_rho(r_cm: float, scale) -> float:
    """Inverse of :func:`rho_to_distance` for the half separation."""
    return _mul(r_cm, _scale(scale).beta)


def t0_to_momentum(t0: float, scale) -> float:
    """``p0 = t0 * beta`` in 1/cm."""
    if not t0 >= 0:
        raise DomainError("t0 must be non-negative")
    return _mul(t0, _scale(scale).beta)


def momentum_to_t0(p0: float, scale) -> float:
    return _div(p0, _scale(scale).beta)


def pretty_length(cm: float) -> str:
    """Human-readable length in pc/kpc/Mpc (cosmetic only)."""
    pc = cm / CM_PER_PARSEC
    for unit, factor in (("Mpc", 1e6), ("kpc", 1e3), ("pc", 1.0)):
        if pc >= factor:
            return f"{pc / factor:.3g} {unit} ({cm / CM_PER_LIGHT_YEAR:.3g} ly)"
    return f"{cm:.3g} cm"
