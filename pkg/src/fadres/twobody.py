"""Dark-heavy two-body subsystem in dimensionless form.

Momenta are measured in units of the potential range parameter, ``t = p/beta``,
and the loop integral is normalized so that ``I(0) = 1``. No masses appear.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, DomainError, EtaPole, NoPoleFound
from .numerics import (
    QuadratureSpec,
    RootFindSpec,
    find_root_complex,
    integrate_adaptive,
    integrate_pv,
)

ETA_POLE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class Coupling:
    """Strength of the separable dark-heavy force; negative is attractive."""

    lambda_dh: float

    def __post_init__(self):
        if not math.isfinite(self.lambda_dh):
            raise DomainError("coupling must be finite")


@dataclass(frozen=True)
class TwoBodyDress:
    loop: complex
    eta: complex
    coupling: Coupling


class PoleKind(str, enum.Enum):
    BOUND = "bound"
    VIRTUAL = "virtual"
    RESONANCE = "resonance"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class PairPole:
    """Pole of the two-body amplitude in the complex ``t0`` plane.

    ``linear_tau`` is the near-threshold estimate ``-(1 + lambda)``, kept for
    comparison with the exact root.
    """

    location: complex
    kind: PoleKind
    linear_tau: float


def _coupling(c) -> Coupling:
    return c if isinstance(c, Coupling) else Coupling(float(c))


def form_factor(t):
    """Reduced S-wave form factor ``t / (1 + t**2)``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("form factor needs t >= 0")
    out = t_arr / (1.0 + t_arr * t_arr)
    return float(out) if out.ndim == 0 else out


def _check_branch(t0):
    # principal branch: Re(1 - i t0) = 1 + Im t0 > 0
    if np.any(1.0 + np.imag(t0) <= 0):
        raise BranchError(f"t0={t0!r} is off the principal branch (need Im t0 > -1)")


def propagator_loop(t0):
    """Closed-form loop integral ``(1 - 2i t0) / (1 - i t0)**2``.

    Accepts scalars or arrays, real or complex.
    """
    _check_branch(t0)
    z = np.asarray(t0, dtype=complex)
    w = 1.0 - 1j * z
    out = (1.0 - 2j * z) / (w * w)
    return complex(out) if out.ndim == 0 else out


def _loop_kernel(t):
    return t**4 / (1.0 + t * t) ** 2


def loop_normalization(spec: QuadratureSpec | None = None) -> float:
    """Prefactor fixing ``I(0) = 1``, obtained by quadrature.

    At ``t0 = 0`` the oracle integrand reduces to ``t**2/(1+t**2)**2``; the
    returned value is the reciprocal of its integral (analytically 4/pi).
    """
    total = integrate_adaptive(lambda t: t * t / (1.0 + t * t) ** 2, 0.0, math.inf, spec)
    return 1.0 / total.real


def propagator_loop_oracle(t0: float, spec: QuadratureSpec | None = None) -> complex:
    """Loop integral by quadrature, independent of the closed form.

    Evaluates ``-N * int_0^inf t^4 / ((1+t^2)^2 (t0^2 - t^2 + i0)) dt`` as a
    principal value plus the on-shell term ``-i pi g(t0) / (2 t0)``, with
    ``N`` from :func:`loop_normalization`.
    """
    t0 = float(t0)
    if not (0 < t0 < math.inf):
        raise DomainError("oracle needs 0 < t0 < inf")
    norm = loop_normalization(spec)
    pv = integrate_pv(_loop_kernel, t0, 0.0, math.inf, spec)
    on_shell = -1j * math.pi * _loop_kernel(t0) / (2.0 * t0)
    return -norm * (pv + on_shell)


def amplification(c, t0) -> TwoBodyDress:
    """Dressed two-body strength ``eta = lambda / (1 + lambda I(t0))``.

    Raises
    ------
    EtaPole
        If ``|1 + lambda I(t0)| < 1e-12``.
    """
    c = _coupling(c)
    loop = propagator_loop(t0)
    denom = 1.0 + c.lambda_dh * loop
    if abs(denom) < ETA_POLE_THRESHOLD:
        raise EtaPole(f"two-body amplitude pole at t0={t0!r} for lambda={c.lambda_dh}")
    return TwoBodyDress(loop=loop, eta=c.lambda_dh / denom, coupling=c)


def eta_values(lambda_dh: float, t0):
    """Vectorized ``eta``; entries at an eta pole come back as NaN."""
    loop = np.asarray(propagator_loop(t0), dtype=complex)
    denom = 1.0 + lambda_dh * loop
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(np.abs(denom) < ETA_POLE_THRESHOLD, np.nan + 0j, lambda_dh / denom)
    return loop, eta


def imaginary_axis_roots(lambda_dh: float) -> tuple[complex, complex]:
    """Both roots in ``tau`` of ``tau^2 + 2 tau (1+lam) + (1+lam) = 0``.

    Substituting ``t0 = i tau`` into ``1/lam + I(t0) = 0`` gives this
    quadratic. Complex roots mean the poles leave the imaginary axis.
    """
    p = 1.0 + lambda_dh
    disc = complex(p * p - p)
    root = disc**0.5
    return -p + root, -p - root


def find_pair_pole(c, spec: RootFindSpec | None = None) -> PairPole:
    """Locate and classify the two-body pole for a nonzero coupling.

    The closed-form root of the imaginary-axis quadratic seeds a Newton
    refinement of ``1/lambda + I(t0) = 0``. Priority: a bound state
    (``t0 = i tau``, ``tau > 0``), then threshold, then the resonance pair
    member with ``Re t0 > 0``, then a virtual level (``tau < 0``).
    """
    c = _coupling(c)
    lam = c.lambda_dh
    if lam == 0:
        raise DomainError("no pole for the free case lambda = 0")
    spec = spec or RootFindSpec()
    linear_tau = -(1.0 + lam)

    if 1.0 + lam == 0:
        return PairPole(0j, PoleKind.THRESHOLD, linear_tau)

    tau_a, tau_b = imaginary_axis_roots(lam)
    if tau_a.imag == 0:
        # real roots; keep those on the principal branch (tau > -1)
        taus = sorted((t.real for t in (tau_a, tau_b) if t.real > -1.0), reverse=True)
        if not taus:
            raise NoPoleFound(f"no principal-branch pole for lambda={lam}")
        tau = taus[0]
        guess = 1j * tau
        kind = PoleKind.BOUND if tau > 0 else PoleKind.VIRTUAL
    else:
        candidates = [1j * tau_a, 1j * tau_b]
        guess = max(candidates, key=lambda z: z.real)
        kind = PoleKind.RESONANCE

    def f(z):
        return 1.0 / lam + propagator_loop(z)

    try:
        z = find_root_complex(f, RootFindSpec(spec.tol, spec.max_iterations, guess))
    except ArithmeticError as exc:
        raise NoPoleFound(f"refinement failed for lambda={lam}: {exc}") from exc
    if kind in (PoleKind.BOUND, PoleKind.VIRTUAL):
        z = 1j * z.imag
        if (z.imag > 0) != (kind is PoleKind.BOUND):
            raise NoPoleFound(f"refined pole {z!r} changed half-plane for lambda={lam}")
    return PairPole(z, kind, linear_tau)
