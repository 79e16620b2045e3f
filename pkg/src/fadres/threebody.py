"""Three-body amplitudes in the fixed-centre (Born-Oppenheimer) limit.

``rho`` is the dimensionless *half* separation ``r * beta`` with ``d = 2 r``.
The two dark-heavy channels are labelled 2 and 3 (array indices 0 and 1);
they are identical, so ``eta_2 = eta_3 = eta``.

The coefficient equations used for the residual checks,
``M+ = J + J eta M-`` and ``M- = J eta M+``, are our reading of how the
delta-function bookkeeping of the fixed-centre Faddeev equation collapses
when the channels are identical and ``J(-r) = J(r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResonanceSingularity, SingularMatrix
from .numerics import QuadratureSpec, integrate_adaptive, integrate_pv
from .twobody import TwoBodyDress

RHO_MIN = 1e-6
SINGULAR_DET = 1e-14


def _check_rho(rho):
    if np.any(np.asarray(rho) < RHO_MIN):
        raise DomainError(f"rho must be >= {RHO_MIN:g}")


def exchange_kernel(rho, t0):
    """Closed-form exchange kernel ``J(rho, t0)``.

    ``exp(-rho)(1 - 2/rho)/(1+t0^2) - (2/rho)(exp(-rho) + t0^2 exp(i t0 rho))/(1+t0^2)^2``.
    Vectorized over ``rho`` and ``t0``.
    """
    _check_rho(rho)
    rho = np.asarray(rho, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    q = 1.0 + t0 * t0
    decay = np.exp(-rho)
    out = decay * (1.0 - 2.0 / rho) / q - (2.0 / rho) * (decay + t0 * t0 * np.exp(1j * t0 * rho)) / (q * q)
    return complex(out) if out.ndim == 0 else out


def exchange_transform_closed(rho, t0):
    """Exact radial Fourier transform of ``nu(t)^2 / (t0^2 - t^2 + i0)``.

    Obtained by partial fractions with the same ``4/pi`` normalization as the
    loop integral:
    ``-exp(-rho)/(1+t0^2) + (2/rho) t0^2 (exp(-rho) - exp(i t0 rho))/(1+t0^2)^2``.
    Its outgoing-wave term coincides with :func:`exchange_kernel`; the
    short-range terms do not.
    """
    _check_rho(rho)
    rho = np.asarray(rho, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    q = 1.0 + t0 * t0
    decay = np.exp(-rho)
    out = -decay / q + (2.0 / rho) * t0 * t0 * (decay - np.exp(1j * t0 * rho)) / (q * q)
    return complex(out) if out.ndim == 0 else out


def _oscillatory_tail(h, rho, cut):
    # int_cut^inf h(t) sin(rho t) dt by two integrations by parts
    step = 1e-3 * cut
    dh = (h(cut + step) - h(cut - step)) / (2 * step)
    return h(cut) * math.cos(rho * cut) / rho - dh * math.sin(rho * cut) / rho**2


def exchange_transform(rho: float, t0: float, spec: QuadratureSpec | None = None,
                       cutoff: float = 400.0) -> complex:
    """Radial Fourier transform of the exchange integrand by quadrature.

    Computes ``(4/pi)(1/rho) int_0^inf t sin(t rho) nu(t)^2 / (t0^2 - t^2 + i0) dt``
    with ``nu(t) = t/(1+t^2)``: principal value on ``[0, cutoff]``, an
    asymptotic tail beyond, and the on-shell term ``-i pi g(t0)/(2 t0)``.
    """
    rho = float(rho)
    t0 = float(t0)
    _check_rho(rho)
    if not t0 > 0:
        raise DomainError("transform oracle needs t0 > 0")
    spec = spec or QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=20000)

    def g(t):
        return t**3 * np.sin(t * rho) / (1.0 + t * t) ** 2

    def h(t):
        return t**3 / ((1.0 + t * t) ** 2 * (t0 * t0 - t * t))

    # panels of half an oscillation period keep each Kronrod panel resolved
    period = math.pi / rho
    n_panels = int(cutoff / period)
    breaks = [k * period for k in range(1, n_panels + 1) if k * period < cutoff]
    pv = integrate_pv(g, t0, 0.0, cutoff, spec, breakpoints=breaks)
    pv += _oscillatory_tail(h, rho, cutoff)
    on_shell = -1j * math.pi * t0**3 * math.sin(t0 * rho) / ((1.0 + t0 * t0) ** 2 * 2.0 * t0)
    return (4.0 / math.pi) * (pv + on_shell) / rho


ORACLE_REFERENCE = (2.0, 0.1)


def exchange_kernel_oracle(rho: float, t0: float, spec: QuadratureSpec | None = None) -> complex:
    """Quadrature oracle for the exchange kernel, normalized at one point.

    The overall (complex) constant is fixed so that the oracle equals
    :func:`exchange_kernel` at ``rho=2, t0=0.1``; elsewhere the two are
    independent.
    """
    ref_rho, ref_t0 = ORACLE_REFERENCE
    scale = exchange_kernel(ref_rho, ref_t0) / exchange_transform(ref_rho, ref_t0, spec)
    return scale * exchange_transform(rho, t0, spec)


@dataclass(frozen=True)
class ChannelMatrix:
    """2x2 matrix over the dark-heavy channels (2, 3)."""

    entries: tuple[tuple[complex, complex], tuple[complex, complex]]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def as_array(self):
        return np.array(self.entries, dtype=complex)

    def swapped(self) -> "ChannelMatrix":
        (a, b), (c, d) = self.entries
        return ChannelMatrix(((d, c), (b, a)))


def lambda_structure(j23: complex, j32: complex | None = None, diagonal=(0, 0)) -> ChannelMatrix:
    """Exchange structure ``J_ij`` between channels, with identically zero diagonal."""
    if any(d != 0 for d in diagonal):
        raise DomainError("the exchange structure must have zero diagonal")
    j32 = j23 if j32 is None else j32
    return ChannelMatrix(((0j, complex(j23)), (complex(j32), 0j)))


def channel_matrix(rho: float, t0: float, dress: TwoBodyDress) -> ChannelMatrix:
    """``K_ij = sum_l J_il eta_l J_lj(-r)``, with ``J(-r) = J(r)`` for S waves."""
    J = exchange_kernel(rho, t0)
    jm = lambda_structure(J).as_array()
    eta = np.diag([dress.eta, dress.eta])
    k = jm @ eta @ jm
    entries = ((complex(k[0, 0]), complex(k[0, 1])), (complex(k[1, 0]), complex(k[1, 1])))
    closed = J * J * dress.eta
    if not (abs(entries[0][0] - closed) <= 1e-12 * max(abs(closed), 1e-300)
            and entries[0][1] == 0 and entries[1][0] == 0):
        raise ArithmeticError("channel matrix lost its diagonal form")
    return ChannelMatrix(entries)


@dataclass(frozen=True)
class MAmplitudes:
    m_plus: complex
    m_minus: complex
    denominator: complex
    kernel: complex


def m_matrix(rho: float, t0: float, dress: TwoBodyDress) -> np.ndarray:
    """Full channel matrix ``M_ij`` (diagonal ``M-``, off-diagonal ``M+``).

    ``M+`` columns come from ``(I - K eta) X = J`` and ``M-`` from
    ``(I - K eta) Y = K``, each solved with :func:`~fadres.numerics.solve_2x2`.
    """
    from .numerics import solve_2x2

    K = channel_matrix(rho, t0, dress).as_array()
    J = lambda_structure(exchange_kernel(rho, t0)).as_array()
    A = np.eye(2) - K * dress.eta
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(det) < SINGULAR_DET:
        raise ResonanceSingularity(
            f"|det(I - K eta)| = {abs(det):.3g} at t0={t0}, rho={rho}", t0=t0, rho=rho)
    m = np.empty((2, 2), dtype=complex)
    try:
        for col in range(2):
            xp = solve_2x2(A, J[:, col])
            xm = solve_2x2(A, K[:, col])
            m[:, col] = np.array(xp) + np.array(xm)
    except SingularMatrix as exc:
        raise ResonanceSingularity(str(exc), t0=t0, rho=rho) from exc
    return m


def m_amplitudes(rho: float, t0: float, dress: TwoBodyDress) -> MAmplitudes:
    """Connected amplitudes ``M+`` (exchange) and ``M-`` (direct).

    Raises
    ------
    ResonanceSingularity
        When ``|det(I - K eta)| < 1e-14``.
    """
    _check_rho(rho)
    m = m_matrix(rho, t0, dress)
    J = exchange_kernel(rho, t0)
    d = 1.0 - (J * dress.eta) ** 2
    return MAmplitudes(m_plus=complex(m[0, 1]), m_minus=complex(m[0, 0]), denominator=d * d, kernel=J)


def faddeev_residuals(m: MAmplitudes, dress: TwoBodyDress) -> tuple[float, float]:
    """Absolute residuals of ``M+ = J + J eta M-`` and ``M- = J eta M+``."""
    J, eta = m.kernel, dress.eta
    return (abs(m.m_plus - J - J * eta * m.m_minus), abs(m.m_minus - J * eta * m.m_plus))


def effective_exchange(m: MAmplitudes, dress: TwoBodyDress) -> complex:
    """``M+ + M-``; algebraically equal to ``J / (1 - J eta)``."""
    return m.m_plus + m.m_minus
