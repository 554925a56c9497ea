import numpy as np
import pytest

from stokes2p import certifier as ce, symbols as sy
from stokes2p.parallel import chunk_ranges, ordered_map, resolve_threads

FP = sy.FluidParams(1.0, 2.0, 1.0, 3.0, 1.0, 1.0)
SMALL = dict(n_radii=3, n_angles=3, n_xi_radii=4, n_xi_angles=3, n_xn=3)


def test_samples_are_seeded_and_in_domain():
    cfg = ce.SectorSampling(n=3, **SMALL)
    a, b = ce.sample_sectors(cfg, 7), ce.sample_sectors(cfg, 7)
    assert np.array_equal(a.lam, b.lam) and np.array_equal(a.xi, b.xi)
    assert len(a) == cfg.size
    assert np.all(sy.in_sector(a.lam, cfg.epsilon, cfg.gamma0 * (1 - 1e-12)))
    assert np.all(sy.in_double_sector(a.xi, cfg.eta))
    c = ce.sample_sectors(cfg, 8)
    assert not np.array_equal(a.lam, c.lam)


def test_extreme_ray_kept():
    cfg = ce.SectorSampling(n=2, **SMALL)
    s = ce.sample_sectors(cfg, 0)
    amax = np.pi - cfg.epsilon - cfg.delta
    assert np.isclose(np.angle(s.lam).max(), amax)


@pytest.mark.parametrize("bad", [dict(eta=np.pi / 4), dict(epsilon=0.0), dict(n=1), dict(radius_range=(0.5, 1.0))])
def test_sampling_validation(bad):
    with pytest.raises(ValueError):
        ce.SectorSampling(**bad)


def test_small_run_all_passes():
    reps = ce.run_all(ce.SectorSampling(n=2, **SMALL), FP, seed=1)
    assert all(r.passed for r in reps), [r.bound_id for r in reps if not r.passed]
    assert all(np.isfinite(r.worst_ratio) for r in reps)
    assert len(reps[0].row()) == len(ce.REPORT_COLUMNS)


def test_thread_count_does_not_change_reports():
    cfg = ce.SectorSampling(n=3, **SMALL)
    one = [r.row() for r in ce.run_all(cfg, FP, seed=3, threads=1)]
    four = [r.row() for r in ce.run_all(cfg, FP, seed=3, threads=4)]
    assert one == four


def test_omega_control_diverges():
    rep = ce.omega_n_control(FP, 2)
    assert rep.passed
    sups = rep.extra["sups"]
    assert sups[-1] / sups[0] > 1e3
    assert rep.extra["slope"] < -0.5


def test_weighted_omega_stays_bounded():
    at = np.geomspace(1.0, 1e-4, 5)
    x = np.geomspace(1e-4, 1e7, 200)
    sups = []
    for a in at:
        tbl = sy.build_symbol_table(sy.SpectralPoint(np.ones(len(x), complex), np.full((len(x), 1), a, complex)), FP)
        w = a * np.abs(sy.omega_n_weighted(tbl, 1, x)) + np.abs(sy.omega_n_weighted(tbl, 1, x, 1))
        sups.append(np.max(w * x))
    assert max(sups) / min(sups) < 10


def test_lopatinskii_requires_surface_constants():
    samples = ce.sample_sectors(ce.SectorSampling(n=2, **SMALL), 0)
    with pytest.raises(ValueError):
        ce.check_lopatinskii_lower(samples, sy.FluidParams(c_sigma=0.0, c_g=1.0))


def test_reduce_flags_non_finite():
    s = ce.sample_sectors(ce.SectorSampling(n=2, **SMALL), 0)
    vals = np.ones(len(s))
    vals[3] = np.nan
    rep = ce._reduce("x", vals, "max", s, ce.Tolerances())
    assert not rep.passed


def test_parallel_helpers(monkeypatch):
    assert chunk_ranges(5, 2) == [(0, 2), (2, 4), (4, 5)]
    assert ordered_map(lambda v: v * v, range(10), 4) == [v * v for v in range(10)]
    monkeypatch.setenv("STOKES2P_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    with pytest.raises(ValueError):
        resolve_threads(0)
