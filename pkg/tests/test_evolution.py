import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stokes2p import evolution as ev, resolvent as rs, symbols as sy
from stokes2p.grid import GridSpec

FP = sy.FluidParams(1.0, 2.0, 1.0, 3.0, 1.0, 1.0)
GRID = GridSpec(n=2, N=(8,), L=(1.0,), X=12.0, Nv=32, beta=4.0, Nz=16)
DATA = rs.InterfaceData.from_modes(GRID, {(1,): {"h2": 1.0, "h1": 0.3j, "g1": 0.2, "d": 0.5}})


def test_contour_geometry():
    c = ev.ContourSpec(1.0, 8, 4.0)
    assert c.dtau == 1.0
    assert np.allclose(c.tau, [-3.5, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5])
    assert c.period == pytest.approx(2 * np.pi)
    with pytest.raises(ValueError):
        ev.ContourSpec(nodes=7)
    with pytest.raises(ValueError):
        ev.ContourSpec(gamma=0.0)


@pytest.mark.parametrize("kind", ["step", "ramp", "bump", "step_exp"])
def test_profile_transform_against_quadrature(kind):
    p = ev.TimeProfile(kind, 0.5)
    t = np.linspace(0, 120, 200001)
    lam = np.array([2.0 + 1.0j, 3.0])
    q = ev.quadrature_transform(t, p(t), lam)
    assert np.allclose(q, p.transform(lam), rtol=1e-6)


def test_profile_vanishes_before_zero():
    assert ev.TimeProfile("step")(-1.0) == 0.0


@given(st.floats(0.1, 3.0))
@settings(max_examples=10, deadline=None)
def test_sampled_profile_transform_matches_closed(rate):
    t = np.linspace(0, 60, 6001)
    closed = ev.TimeProfile("ramp", rate)
    samp = ev.TimeProfile("sampled", t_samples=tuple(t), values=tuple(closed(t)))
    assert abs(samp.transform(2.0) - closed.transform(2.0)) < 1e-4


def test_growth_rate_guard():
    with pytest.raises(ev.GrowthRateError):
        ev.solve_evolution(ev.TimeData(DATA, ev.TimeProfile("step_exp", 2.0)), ev.ContourSpec(1.5, 64, 20.0), FP,
                           GRID)


def test_round_trip_and_causality():
    c = ev.ContourSpec(1.0, 2048, 536.0)
    times = np.linspace(0, c.period / 2, 8193)
    ser = ev.solve_evolution(ev.TimeData(DATA, ev.TimeProfile("ramp", 1.0)), c, FP, GRID, times)
    assert ev.round_trip_error(ser, 3.0) < 1e-4
    assert ev.round_trip_error(ser, 3.0, method="exact") < 1e-4
    assert ev.causality_ratio(ser) < 1e-3


def test_maxreg_time_domain_matches_plancherel():
    c = ev.ContourSpec(1.0, 256, 60.0)
    times = np.linspace(0, c.period, 2048, endpoint=False)
    ser = ev.solve_evolution(ev.TimeData(DATA, ev.TimeProfile("bump", 1.0)), c, FP, GRID, times)
    a = ev.maxreg_ratio(ser)
    b = ev.maxreg_ratio(ser, plancherel=True)
    assert a.ratio == pytest.approx(b.ratio, rel=1e-3)
    with pytest.raises(ValueError):
        ev.maxreg_ratio(ser, p=3, plancherel=True)


def test_maxreg_ratio_stable_in_gamma():
    ratios = []
    for gm in (1.0, 2.0, 4.0):
        c = ev.ContourSpec(gm, 256, 60.0)
        ser = ev.solve_evolution(ev.TimeData(DATA, ev.TimeProfile("bump", 1.0)), c, FP, GRID,
                                 np.linspace(0, c.period, 2048, endpoint=False))
        ratios.append(ev.maxreg_ratio(ser, p=3, q=2).ratio)
    assert max(ratios) / min(ratios) < 2


@pytest.mark.filterwarnings("ignore::stokes2p.evolution.TruncationWarning")
def test_thread_count_irrelevant():
    c = ev.ContourSpec(1.0, 64, 20.0)
    td = ev.TimeData(DATA, ev.TimeProfile("ramp", 1.0))
    a = ev.solve_evolution(td, c, FP, GRID, threads=1)
    b = ev.solve_evolution(td, c, FP, GRID, threads=4)
    assert np.array_equal(a.nodes_u[1], b.nodes_u[1])


def test_truncation_warning_on_short_contour():
    with pytest.warns(ev.TruncationWarning):
        ev.solve_evolution(ev.TimeData(DATA, ev.TimeProfile("ramp", 1.0)), ev.ContourSpec(1.0, 16, 4.0), FP, GRID)
