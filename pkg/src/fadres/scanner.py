"""Parameter-plane scans, resonance location and resonance-region clustering."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.optimize import minimize_scalar

from .enhancement import Variant, xi_values
from .errors import DomainError, NoSignChange
from .numerics import RootFindSpec, find_root_real
from .threebody import RHO_MIN
from .twobody import Coupling, _coupling

PREGRID_STEP = 0.01
MAX_RESIDUAL = 0.5


def default_workers() -> int:
    """Worker count from ``FADRES_THREADS``, else all cores."""
    raw = os.environ.get("FADRES_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise DomainError(f"FADRES_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise DomainError("FADRES_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ScanGrid:
    lambda_dh: float
    t0_range: tuple[float, float] = (0.001, 0.6)
    n_t0: int = 300
    rho_range: tuple[float, float] = (1.0, 6.0)
    n_rho: int = 600
    variant: Variant = Variant.SUMMED

    def __post_init__(self):
        _coupling(self.lambda_dh)
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        (ta, tb), (ra, rb) = self.t0_range, self.rho_range
        if not (0 <= ta < tb):
            raise DomainError("t0 range must satisfy 0 <= a < b")
        if not (RHO_MIN <= ra < rb):
            raise DomainError(f"rho range must satisfy {RHO_MIN:g} <= a < b")
        if self.n_t0 < 2 or self.n_rho < 2:
            raise DomainError("grid step counts must be >= 2")

    @property
    def t0_values(self):
        return np.linspace(*self.t0_range, self.n_t0)

    @property
    def rho_values(self):
        return np.linspace(*self.rho_range, self.n_rho)


@dataclass(frozen=True)
class ScanSample:
    t0: float
    rho: float
    xi: complex
    denom_abs: float
    singular: bool


@dataclass(frozen=True)
class SurfaceArrays:
    """Row-major (t0 outer, rho inner) scan results as 2-D arrays."""

    t0: np.ndarray
    rho: np.ndarray
    xi: np.ndarray
    denom_abs: np.ndarray
    singular: np.ndarray


@dataclass(frozen=True)
class ResonanceRecord:
    lambda_dh: float
    t0: float
    rho_star: float
    peak_abs_xi: float
    fwhm_rho: float
    residual: float
    fwhm_bounds: tuple[float, float] = (math.nan, math.nan)


@dataclass(frozen=True)
class ResonanceRegion:
    t0_window: tuple[float, float]
    rho_window: tuple[float, float]
    max_abs_xi: float
    peak_t0: float
    peak_rho: float


def scan_arrays(grid: ScanGrid, workers: int | None = None) -> SurfaceArrays:
    """Evaluate the grid; each t0 row is an independent unit of work.

    Rows are always computed by the same vectorized call regardless of how
    they are distributed, so the result does not depend on ``workers``.
    """
    t0s = grid.t0_values
    rhos = grid.rho_values

    def row(t0):
        return xi_values(grid.lambda_dh, t0, rhos, grid.variant)

    workers = workers or default_workers()
    if workers == 1:
        rows = [row(t) for t in t0s]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, t0s))
    xi = np.stack([r[0] for r in rows])
    denom = np.abs(np.stack([r[1] for r in rows]))
    singular = ~np.isfinite(xi)
    T, R = np.meshgrid(t0s, rhos, indexing="ij")
    return SurfaceArrays(T, R, xi, denom, singular)


def scan_surface(grid: ScanGrid, workers: int | None = None) -> list[ScanSample]:
    """Samples in row-major order (t0 outer, rho inner); singular points are flagged."""
    s = scan_arrays(grid, workers)
    return [
        ScanSample(float(t), float(r), complex(x), float(d), bool(f))
        for t, r, x, d, f in zip(s.t0.ravel(), s.rho.ravel(), s.xi.ravel(),
                                 s.denom_abs.ravel(), s.singular.ravel())
    ]


def _abs_xi(lam, t0, rho, variant):
    x, _ = xi_values(lam, t0, rho, variant)
    return np.abs(x)


def _half_crossing(profile, mag, rho_grid, start, direction, level, spec):
    """Where |xi| first drops below ``level`` walking away from ``start``."""
    j = start
    while 0 <= j + direction < len(rho_grid):
        nxt = j + direction
        if mag[nxt] < level:
            lo, hi = sorted((rho_grid[j], rho_grid[nxt]))
            try:
                return find_root_real(lambda r: profile(r) - level, (lo, hi),
                                      RootFindSpec(tol=max(spec.tol, 1e-12 * level)))
            except (NoSignChange, ArithmeticError):
                return float(rho_grid[nxt])
        j = nxt
    return float(rho_grid[j])


def find_resonances(c, t0: float, rho_range=(1.0, 6.0), variant=Variant.SUMMED,
                    spec: RootFindSpec | None = None,
                    step: float = PREGRID_STEP) -> list[ResonanceRecord]:
    """Resonance distances at fixed ``t0``.

    Local maxima of ``|xi(rho)|`` on a pre-grid with spacing at most
    ``step`` seed a bounded minimization of ``|denom|^2`` (``1 - J eta`` for
    the summed variant, ``1 - J^2 eta^2`` otherwise). Candidates whose
    residual ``|denom|`` is not below 0.5 are dropped. The width is the full
    width at half maximum of ``|xi(rho)|``. An empty list means no resonance.
    """
    c = _coupling(c)
    variant = Variant.parse(variant)
    spec = spec or RootFindSpec(tol=1e-10)
    a, b = map(float, rho_range)
    if not (RHO_MIN <= a < b) or not math.isfinite(b):
        raise DomainError(f"invalid rho range [{a}, {b}]")
    if c.lambda_dh == 0:
        return []
    lam = c.lambda_dh
    n = max(3, int(math.ceil((b - a) / step)) + 1)
    grid = np.linspace(a, b, n)
    xi_grid, denom_grid = xi_values(lam, t0, grid, variant)
    mag = np.abs(xi_grid)
    mag = np.where(np.isfinite(mag), mag, np.inf)
    dabs = np.abs(denom_grid)

    def profile(r):
        return float(_abs_xi(lam, t0, r, variant))

    def denom2(r):
        return float(np.abs(xi_values(lam, t0, r, variant)[1]) ** 2)

    records = []
    seeds = [i for i in range(1, n - 1) if mag[i] >= mag[i - 1] and mag[i] > mag[i + 1]]
    for i in seeds:
        lo, hi = grid[max(i - 3, 0)], grid[min(i + 3, n - 1)]
        res = minimize_scalar(denom2, bounds=(lo, hi), method="bounded",
                              options={"xatol": max(spec.tol, 1e-12), "maxiter": spec.max_iterations})
        rho_star, residual = float(res.x), math.sqrt(float(res.fun))
        if not residual <= dabs[i]:
            rho_star, residual = float(grid[i]), float(dabs[i])
        if residual >= MAX_RESIDUAL:
            continue
        if any(abs(rec.rho_star - rho_star) < step for rec in records):
            continue
        peak = profile(rho_star)
        if not math.isfinite(peak):
            peak = math.inf
        level = 0.5 * (peak if math.isfinite(peak) else mag[i])
        left = _half_crossing(profile, mag, grid, i, -1, level, spec)
        right = _half_crossing(profile, mag, grid, i, +1, level, spec)
        left, right = min(left, rho_star), max(right, rho_star)
        records.append(ResonanceRecord(lam, float(t0), rho_star, peak, right - left,
                                       residual, (left, right)))
    records.sort(key=lambda rec: rec.rho_star)
    return records


def find_resonance_regions(grid: ScanGrid, percentile: float = 2.0,
                           max_denom: float = math.inf,
                           workers: int | None = None,
                           surface: SurfaceArrays | None = None) -> list[ResonanceRegion]:
    """Connected (4-neighbour) clusters of small-denominator samples.

    A sample belongs to a region when its ``denom_abs`` lies strictly below
    the given percentile of the whole grid (and below ``max_denom``, which is
    unbounded by default). Regions are reported as bounding windows with
    their largest ``|xi|``, sorted by rho.
    """
    s = surface if surface is not None else scan_arrays(grid, workers)
    threshold = np.percentile(s.denom_abs, percentile)
    mask = (s.denom_abs < threshold) & (s.denom_abs < max_denom)
    labels, count = ndimage.label(mask)
    regions = []
    mag = np.where(s.singular, np.inf, np.abs(s.xi))
    for k in range(1, count + 1):
        ii, jj = np.nonzero(labels == k)
        m = mag[ii, jj]
        top = int(np.argmax(m))
        regions.append(ResonanceRegion(
            (float(s.t0[ii, jj].min()), float(s.t0[ii, jj].max())),
            (float(s.rho[ii, jj].min()), float(s.rho[ii, jj].max())),
            float(m[top]),
            float(s.t0[ii[top], jj[top]]),
            float(s.rho[ii[top], jj[top]]),
        ))
    regions.sort(key=lambda r: (r.rho_window[0], r.t0_window[0]))
    return regions


__all__ = [
    "Coupling", "ResonanceRecord", "ResonanceRegion", "ScanGrid", "ScanSample",
    "SurfaceArrays", "default_workers", "find_resonance_regions", "find_resonances",
    "scan_arrays", "scan_surface",
]
