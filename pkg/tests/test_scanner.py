import numpy as np
import pytest

from fadres.enhancement import Variant, xi_values
from fadres.errors import DomainError
from fadres.scanner import (
    ScanGrid,
    default_workers,
    find_resonance_regions,
    find_resonances,
    scan_arrays,
    scan_surface,
)


@pytest.fixture(scope="module")
def surface_097():
    grid = ScanGrid(-0.97, rho_range=(1.0, 30.0))
    return grid, scan_arrays(grid, workers=4)


def test_free_grid_is_identity():
    samples = scan_surface(ScanGrid(0.0, n_t0=7, n_rho=9), workers=2)
    assert len(samples) == 63
    assert all(s.xi == 1 and not s.singular for s in samples)


def test_row_major_order():
    grid = ScanGrid(-0.95, t0_range=(0.1, 0.2), n_t0=3, rho_range=(1, 2), n_rho=4)
    samples = scan_surface(grid, workers=1)
    t0s, rhos = np.linspace(0.1, 0.2, 3), np.linspace(1, 2, 4)
    assert [(s.t0, s.rho) for s in samples] == [(t, r) for t in t0s for r in rhos]


def test_peak_of_default_window():
    s = scan_arrays(ScanGrid(-0.95), workers=2)
    i, j = np.unravel_index(np.nanargmax(np.abs(s.xi)), s.xi.shape)
    assert 2.3 <= s.rho[i, j] <= 3.0


def test_repulsive_window_is_smooth():
    s = scan_arrays(ScanGrid(10.0), workers=2)
    assert s.denom_abs.min() > 0.3
    assert not s.singular.any()


@pytest.mark.parametrize("workers", [1, 2, 3, 8])
def test_partitioning_does_not_change_bits(workers):
    grid = ScanGrid(-0.97, n_t0=37, n_rho=53, rho_range=(1, 30))
    ref = scan_arrays(grid, workers=1)
    s = scan_arrays(grid, workers=workers)
    assert s.xi.tobytes() == ref.xi.tobytes()
    assert s.denom_abs.tobytes() == ref.denom_abs.tobytes()


def test_surface_matches_pointwise_evaluation():
    grid = ScanGrid(-0.95, n_t0=5, n_rho=6, variant="diagonal")
    for sample in scan_surface(grid, workers=1)[::7]:
        value, denom = xi_values(-0.95, sample.t0, sample.rho, Variant.DIAGONAL)
        assert sample.xi == value
        assert sample.denom_abs == pytest.approx(abs(denom), rel=1e-14)


@pytest.mark.parametrize("kwargs", [
    dict(t0_range=(0.5, 0.1)),
    dict(rho_range=(0.0, 6.0)),
    dict(n_rho=1),
    dict(variant="bogus"),
])
def test_grid_validation(kwargs):
    with pytest.raises(DomainError):
        ScanGrid(-0.95, **kwargs)


def test_thread_env(monkeypatch):
    monkeypatch.setenv("FADRES_THREADS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("FADRES_THREADS", "zero")
    with pytest.raises(DomainError):
        default_workers()


# --- resonance records -------------------------------------------------------------

def test_single_resonance_near_2p7():
    records = find_resonances(-0.95, 0.12, (1.0, 6.0))
    assert len(records) == 1
    rec = records[0]
    assert rec.rho_star == pytest.approx(2.7, abs=0.15)
    assert rec.fwhm_rho > 0 and rec.residual < 0.5
    assert 1.0 <= rec.rho_star <= 6.0


@pytest.mark.parametrize("lam, t0, rho_range", [(0.0, 0.12, (1, 6)), (10.0, 0.12, (1, 30))])
def test_no_resonance(lam, t0, rho_range):
    assert find_resonances(lam, t0, rho_range) == []


@pytest.mark.parametrize("lam", [-0.9, -0.95, -0.97])
@pytest.mark.parametrize("variant", list(Variant))
def test_record_invariants(lam, variant):
    rho_grid = np.arange(1.0, 30.0 + 1e-9, 0.01)
    _, coarse = xi_values(lam, 0.12, rho_grid, variant)
    for rec in find_resonances(lam, 0.12, (1.0, 30.0), variant):
        left, right = rec.fwhm_bounds
        assert left < rec.rho_star < right
        assert rec.fwhm_rho == pytest.approx(right - left)
        for edge in (left, right):
            edge_value, _ = xi_values(lam, 0.12, edge, variant)
            assert abs(edge_value) <= rec.peak_abs_xi
        # refinement never loses against the nearest coarse sample
        seed = int(np.argmin(np.abs(rho_grid - rec.rho_star)))
        assert rec.residual <= np.abs(coarse[max(seed - 3, 0):seed + 4]).min() + 1e-12
        assert rec.residual < 0.5


def test_monotone_sensitivity():
    peaks = [find_resonances(lam, 0.12, (1.0, 6.0))[0].peak_abs_xi for lam in (-0.90, -0.95, -0.97)]
    assert peaks[0] < peaks[1] < peaks[2]


def test_bad_range():
    with pytest.raises(DomainError):
        find_resonances(-0.95, 0.12, (6.0, 1.0))


# --- regions ----------------------------------------------------------------------

def test_two_region_scan(surface_097):
    grid, s = surface_097
    regions = find_resonance_regions(grid, surface=s)
    assert len(regions) >= 2
    assert any(r.rho_window[0] <= 2.5 and r.rho_window[1] >= 3.5 for r in regions)
    assert any(r.rho_window[0] <= 25 and r.rho_window[1] >= 15 for r in regions)
    for r in regions:
        assert r.t0_window[0] <= r.peak_t0 <= r.t0_window[1]
        assert r.rho_window[0] <= r.peak_rho <= r.rho_window[1]


def test_regions_sorted_and_reproducible(surface_097):
    grid, s = surface_097
    regions = find_resonance_regions(grid, surface=s)
    assert regions == find_resonance_regions(grid, workers=1)
    starts = [r.rho_window[0] for r in regions]
    assert starts == sorted(starts)


def test_region_contains_single_resonance():
    grid = ScanGrid(-0.95, rho_range=(1.0, 30.0))
    regions = find_resonance_regions(grid, workers=2)
    assert any(r.rho_window[0] <= 2.65 <= r.rho_window[1] for r in regions)


def test_free_model_has_no_regions():
    assert find_resonance_regions(ScanGrid(0.0, rho_range=(1.0, 30.0))) == []


def test_absolute_cap_shrinks_regions(surface_097):
    grid, s = surface_097
    capped = find_resonance_regions(grid, max_denom=0.5, surface=s)
    assert len(capped) < len(find_resonance_regions(grid, surface=s))
