"""Numerical kernel: adaptive quadrature, principal values, root finding and
tiny dense complex solves.

Everything here is a pure function of its inputs. Complex values are plain
Python ``complex``; integrands may be evaluated on numpy arrays of nodes.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DerivativeVanished,
    DomainError,
    NoSignChange,
    NonConvergence,
    PoleOutsideInterval,
    SingularMatrix,
)

EPS = np.finfo(float).eps

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full symmetric node set on [-1, 1] and the matching weights.
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[1:7:2] = _WG[:3]
_GW[7] = _WG[3]
_GW[9:14:2] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 5000

    def __post_init__(self):
        floor = 100 * EPS
        if not (self.abs_tol >= floor and self.rel_tol >= floor):
            raise DomainError(f"quadrature tolerances must be >= {floor:.3g}")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class RootFindSpec:
    """Tolerance on ``|f|``, iteration budget and starting information.

    ``initial_guess`` is either a complex number (Newton) or a real
    bracket ``(a, b)`` with ``a < b``.
    """

    tol: float = 1e-12
    max_iterations: int = 200
    initial_guess: complex | tuple[float, float] | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if int(self.max_iterations) < 1:
            raise DomainError("max_iterations must be >= 1")
        g = self.initial_guess
        if isinstance(g, tuple) and not g[0] < g[1]:
            raise DomainError("bracket must satisfy a < b")


def _as_complex(value) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NonConvergence(f"non-finite value {z!r}")
    return z


def _kronrod_panels(f, lo, hi):
    """Apply the G7/K15 pair to each panel [lo[k], hi[k]] in one call of f."""
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=complex).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)]
        raise NonConvergence(f"integrand not finite at t={bad[0]!r}")
    kron = half * (y @ _KW)
    gauss = half * (y @ _GW)
    return kron, np.abs(kron - gauss)


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    *,
    breakpoints: Sequence[float] = (),
    vectorized: bool = True,
) -> complex:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of a complex integrand.

    Parameters
    ----------
    f : callable
        Integrand. With ``vectorized=True`` it is called with a 1-D array of
        nodes and must return an array of the same length.
    a, b : float
        Limits, ``a < b``. ``b`` may be ``inf``; the tail is then mapped to a
        finite range with ``t = a + u / (1 - u)``.
    spec : QuadratureSpec
    breakpoints : sequence of float
        Optional interior points used as the initial partition (poles,
        kinks, oscillation periods).

    Returns
    -------
    complex
        Estimate whose summed error estimate is at most
        ``max(abs_tol, rel_tol * |result|)``.

    Raises
    ------
    NonConvergence
        When the subdivision budget is exhausted.
    """
    spec = spec or QuadratureSpec()
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and a < b):
        raise DomainError(f"need finite a < b, got [{a}, {b}]")

    g = f if vectorized else np.vectorize(lambda t: complex(f(t)), otypes=[complex])
    if math.isinf(b):
        def integrand(u):
            w = 1.0 - u
            return g(a + u / w) / (w * w)

        edges = [(p - a) / (1.0 + p - a) for p in breakpoints if a < p]
        lo_, hi_ = 0.0, 1.0
    else:
        integrand = g
        edges = [p for p in breakpoints if a < p < b]
        lo_, hi_ = a, b

    cuts = np.array(sorted({lo_, hi_, *edges}))
    values, errors = _kronrod_panels(integrand, cuts[:-1], cuts[1:])

    # max-heap on error; the counter breaks ties deterministically
    heap = []
    counter = 0
    retired_val = 0j
    retired_err = 0.0
    for lo, hi, v, e in zip(cuts[:-1], cuts[1:], values, errors):
        heap.append((-e, counter, lo, hi, complex(v)))
        counter += 1
    heapq.heapify(heap)
    total = complex(np.sum(values))
    err = float(np.sum(errors))

    splits = 0
    while err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if not heap:
            break
        if splits >= spec.max_subdivisions:
            raise NonConvergence(
                f"{spec.max_subdivisions} subdivisions exhausted on [{a}, {b}]; "
                f"error estimate {err:.3g}"
            )
        neg_e, _, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or (hi - lo) <= 64 * EPS * max(abs(lo), abs(hi), 1e-300):
            retired_val += v
            retired_err += -neg_e
            continue
        vals, errs = _kronrod_panels(integrand, np.array([lo, mid]), np.array([mid, hi]))
        total += complex(vals[0] + vals[1]) - v
        err += float(errs[0] + errs[1]) + neg_e
        heapq.heappush(heap, (-float(errs[0]), counter, lo, mid, complex(vals[0])))
        heapq.heappush(heap, (-float(errs[1]), counter + 1, mid, hi, complex(vals[1])))
        counter += 2
        splits += 1

    # recompute the sum from the leaves to shed accumulated update roundoff
    total = retired_val + math.fsum(v.real for *_, v in heap) + 1j * math.fsum(v.imag for *_, v in heap)
    err = retired_err + sum(-e for e, *_ in heap)
    if err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        raise NonConvergence(f"roundoff limits accuracy on [{a}, {b}]; error estimate {err:.3g}")
    return _as_complex(total)


def pv_kernel_integral(pole: float, a: float, b: float) -> float:
    """Principal value of the integral of 1/(pole**2 - t**2) over [a, b].

    Requires ``pole > 0`` and ``-pole < a``; ``b`` may be infinite.
    """
    def antiderivative(t):
        if math.isinf(t):
            return 0.0
        return math.log(abs((pole + t) / (pole - t))) / (2.0 * pole)

    return antiderivative(b) - antiderivative(a)


def integrate_pv(
    g: Callable,
    pole: float,
    a: float,
    b: float,
    spec: QuadratureSpec | None = None,
    *,
    breakpoints: Sequence[float] = (),
) -> float:
    """Cauchy principal value of the integral of g(t) / (pole**2 - t**2).

    The singular part ``g(pole) / (pole**2 - t**2)`` is integrated in closed
    form; the remainder is regular and goes through :func:`integrate_adaptive`.
    ``g`` must accept numpy arrays and be smooth at ``pole``. ``b`` may be
    infinite provided ``g`` stays bounded.

    The imaginary part from a ``+i0`` prescription is *not* included; add
    ``-i*pi*g(pole)/(2*pole)`` separately.
    """
    pole = float(pole)
    if not (a < pole < b):
        raise PoleOutsideInterval(f"pole {pole} not inside ({a}, {b})")
    if not (pole > 0 and a > -pole):
        raise PoleOutsideInterval("the mirror pole -pole must lie outside the interval")

    g_pole = float(np.real(g(np.array([pole]))[0]))

    def remainder(t):
        t = np.asarray(t, dtype=float)
        return (np.real(g(t)) - g_pole) / ((pole - t) * (pole + t))

    regular = integrate_adaptive(remainder, a, b, spec, breakpoints=(pole, *breakpoints))
    return regular.real + g_pole * pv_kernel_integral(pole, a, b)


def find_root_real(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    spec: RootFindSpec | None = None,
) -> float:
    """Bracketed root of a real function (Illinois false position).

    Each iterate stays inside the current bracket; steps that make poor
    progress fall back to bisection. Stops once ``|f(x)| <= spec.tol``.
    """
    spec = spec or RootFindSpec()
    a, b = map(float, bracket)
    if not a < b:
        raise DomainError("bracket must satisfy a < b")
    fa, fb = float(f(a)), float(f(b))
    if abs(fa) <= spec.tol:
        return a
    if abs(fb) <= spec.tol:
        return b
    if fa * fb > 0:
        raise NoSignChange(f"f({a})={fa:.3g} and f({b})={fb:.3g} share a sign")

    side = 0
    stall = 0
    last_width = b - a
    for _ in range(spec.max_iterations):
        if stall >= 3:
            x = 0.5 * (a + b)
            stall = 0
        else:
            x = (a * fb - b * fa) / (fb - fa)
            if not a < x < b:
                x = 0.5 * (a + b)
        fx = float(f(x))
        if abs(fx) <= spec.tol:
            return x
        if (fx > 0) == (fb > 0):
            b, fb = x, fx
            if side == -1:
                fa *= 0.5  # Illinois damping of the retained endpoint
            side = -1
        else:
            a, fa = x, fx
            if side == 1:
                fb *= 0.5
            side = 1
        width = b - a
        stall = stall + 1 if width > 0.5 * last_width else 0
        if stall == 0:
            last_width = width
        if width <= 4 * EPS * max(abs(a), abs(b), 1e-300):
            break
    raise NonConvergence(f"no |f| <= {spec.tol:g} within {spec.max_iterations} iterations")


def find_root_complex(
    f: Callable[[complex], complex],
    spec: RootFindSpec,
) -> complex:
    """Newton iteration for an analytic function with a differenced derivative.

    The derivative is a central difference with step ``1e-6 * max(1, |z|)``.
    """
    if spec.initial_guess is None or isinstance(spec.initial_guess, tuple):
        raise DomainError("complex root finding needs a complex initial_guess")
    z = complex(spec.initial_guess)
    fz = _as_complex(f(z))
    for _ in range(spec.max_iterations):
        if abs(fz) <= spec.tol:
            return z
        h = 1e-6 * max(1.0, abs(z))
        dfz = (_as_complex(f(z + h)) - _as_complex(f(z - h))) / (2 * h)
        if dfz == 0 or not math.isfinite(abs(dfz)):
            raise DerivativeVanished(f"f'(z) vanished at z={z!r}")
        z = z - fz / dfz
        fz = _as_complex(f(z))
    if abs(fz) <= spec.tol:
        return z
    raise NonConvergence(f"Newton did not reach |f| <= {spec.tol:g}; last z={z!r}, |f|={abs(fz):.3g}")


def solve_2x2(A, b) -> tuple[complex, complex]:
    """Solve a 2x2 complex system by Gaussian elimination with partial pivoting.

    Raises ``SingularMatrix`` when ``|det A| < 1e-14 * ||A||_F**2``.
    """
    (a00, a01), (a10, a11) = ((complex(x) for x in row) for row in A)
    b0, b1 = complex(b[0]), complex(b[1])
    det = a00 * a11 - a01 * a10
    norm2 = abs(a00) ** 2 + abs(a01) ** 2 + abs(a10) ** 2 + abs(a11) ** 2
    if not abs(det) >= 1e-14 * norm2 or norm2 == 0:
        raise SingularMatrix(f"|det A| = {abs(det):.3g} below threshold")
    if abs(a10) > abs(a00):
        a00, a01, a10, a11 = a10, a11, a00, a01
        b0, b1 = b1, b0
    m = a10 / a00
    u11 = a11 - m * a01
    x1 = (b1 - m * b0) / u11
    x0 = (b0 - a01 * x1) / a00
    return _as_complex(x0), _as_complex(x1)
