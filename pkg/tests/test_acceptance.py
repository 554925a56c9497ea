"""Acceptance criteria at their stated tolerances.  Each test records one PASS/FAIL line."""
import time
import warnings

import numpy as np
import pytest
import yaml

from stokes2p import certifier as ce, cli, evolution as ev, operators as op, resolvent as rs, symbols as sy
from stokes2p.grid import GridSpec
from oracles import height_per_kinematic_datum, normal_trace_per_unit_normal_stress

FP = sy.FluidParams(1.0, 2.0, 1.0, 3.0, 1.0, 1.0)
SYM = sy.FluidParams(1.0, 1.0, 1.0, 1.0, 1.0, 0.0)


def test_c01_determinant_identity(verdict):
    t0 = time.perf_counter()
    worst_direct = 0.0
    for n in (2, 3):
        s = ce.sample_sectors(ce.SectorSampling(n=n), seed=0)
        assert len(s) == 10_000
        tbl = sy.build_symbol_table(s.point(), FP)
        rel = np.abs(tbl.detL_closed - tbl.detL_direct) / np.abs(tbl.detL_direct)
        worst_direct = max(worst_direct, float(rel.max()))
        same = sy.FluidParams(1.7, 1.7, 2.5, 2.5)
        ts = sy.build_symbol_table(s.point(), same)
        B = ts.B_plus
        collapse = -4 * 2.5 ** 2 * B * (ts.A + B) ** 2
        worst_sym = float((np.abs(ts.detL_closed - collapse) / np.abs(collapse)).max())
    elapsed = time.perf_counter() - t0
    ok = worst_direct < 1e-10 and worst_sym < 1e-12 and elapsed < 10
    verdict(1, "determinant identity", ok,
            f"closed/direct {worst_direct:.1e}, symmetric collapse {worst_sym:.1e}, {elapsed:.1f}s")
    assert ok


def test_c02_hand_values(verdict):
    tbl = sy.build_symbol_table(sy.SpectralPoint(np.array([3.0 + 0j]), np.array([[1.0 + 0j]])), SYM)
    det = tbl.detL_closed[0]
    a2n = sy.phi_trace(tbl)[0]
    lop = tbl.lopatinskii[0]
    # |xi'| = 1 is mode k = 1 on a unit torus
    g = GridSpec(n=2, N=(8,), L=(1.0,), X=10.0, Nv=8)
    d = rs.InterfaceData.from_modes(g, {(1,): {"d": 1.0}})
    fld = rs.solve_rswith(None, d, 3.0, SYM, g)
    ratio = fld.eta_hat[0] / fld.meta["d_tilde"][0]
    checks = {
        "det L": (det, -72.0),
        "a_2n": (a2n, -1 / 12),
        "surface symbol": (lop, -210.0),
        "eta/d": (ratio, 12 / 35),
    }
    rel = {k: abs(v - ref) / abs(ref) for k, (v, ref) in checks.items()}
    ok = all(r < 1e-12 for r in rel.values())
    detail = ", ".join(f"{k} {checks[k][0].real:.6g} vs {checks[k][1]:.6g}" for k in checks)
    verdict(2, "hand-value fixtures", ok, detail)
    assert rel["det L"] < 1e-12
    assert ok, "stated a_2n, surface symbol and height ratio disagree with the independent modal oracle"


def test_c02_oracle_values():
    # the values produced by an independent dense solve of the modal system at the same point
    assert normal_trace_per_unit_normal_stress(3.0, [1.0], SYM) == pytest.approx(1 / 12, rel=1e-12)
    assert height_per_kinematic_datum(3.0, [1.0], SYM) == pytest.approx(12 / 37, rel=1e-12)
    tbl = sy.build_symbol_table(sy.SpectralPoint(np.array([3.0 + 0j]), np.array([[1.0 + 0j]])), SYM)
    assert sy.phi_trace(tbl)[0] == pytest.approx(1 / 12, rel=1e-12)
    assert tbl.lopatinskii[0] == pytest.approx(-222.0, rel=1e-12)


def test_c03_exact_solvability(verdict):
    rng = np.random.default_rng(3)
    worst_rows = worst_div = 0.0
    for i in range(100):
        n = 2 + i % 2
        N = (8,) * (n - 1)
        g = GridSpec(n=n, N=N, L=(1.0,) * (n - 1), X=20.0, Nv=32, beta=4.0)
        k = tuple(int(v) for v in rng.integers(-3, 4, n - 1))
        if not any(k):
            k = (1,) + k[1:]
        entries = {f"{f}{j}": complex(*rng.normal(size=2)) for f in "gh" for j in range(1, n + 1)}
        lam = 10 ** rng.uniform(-2, 4) * np.exp(1j * rng.uniform(-0.74, 0.74) * np.pi)
        d = rs.InterfaceData.from_modes(g, {k: entries})
        rep = rs.residual_report(rs.boundary_solve(d, lam, FP, g), d, fd=False).spectral
        worst_div = max(worst_div, rep["divergence+"], rep["divergence-"])
        worst_rows = max(worst_rows, *rep.values())
    ok = worst_rows < 1e-9 and worst_div < 1e-10
    verdict(3, "exact solvability", ok, f"worst row {worst_rows:.1e}, divergence {worst_div:.1e}")
    assert ok


def test_c04_fd_oracle_order(verdict):
    t0 = time.perf_counter()
    base = GridSpec(n=3, N=(64, 64), L=(1.0, 1.0), X=20.0, Nv=32, beta=4.0)
    modes = {(1, 2): {"g1": 1.0, "h3": 0.5, "d": 0.3}, (-3, 1): {"g3": 0.4j, "h1": 0.2}, (5, -4): {"g2": 0.1}}
    orders = {}
    for name, solver in (("without", rs.solve_rswithout), ("with", rs.solve_rswith)):
        def solve(Nv, solver=solver):
            g = GridSpec(n=3, N=base.N, L=base.L, X=base.X, Nv=Nv, beta=base.beta)
            d = rs.InterfaceData.from_modes(g, modes)
            return solver(None, d, 2.0 + 1.0j, FP, g), d

        orders[name], _ = rs.fd_convergence_order(solve, (32, 64, 128))
    elapsed = time.perf_counter() - t0
    allo = np.concatenate(list(orders.values()))
    ok = bool(np.all(np.abs(allo - 2.0) <= 0.2)) and elapsed < 120
    verdict(4, "finite-difference oracle", ok,
            f"orders {', '.join(f'{o:.2f}' for o in allo)}, {elapsed:.1f}s")
    assert ok


def test_c05_kinematic_identity(verdict):
    cfg = ce.SectorSampling(n=3, n_radii=10, n_angles=10, n_xi_radii=10, n_xi_angles=1, n_xn=1, gamma0=1.0)
    s = ce.sample_sectors(cfg, seed=5)
    assert len(s) == 1000
    tbl = sy.build_symbol_table(s.point(), FP)
    g = GridSpec(n=3, N=(4, 4), L=(1.0, 1.0), X=10.0, Nv=8)
    rng = np.random.default_rng(5)
    d_tilde = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    eta, u, _ = rs.surface_solve(d_tilde, tbl, g)
    res = tbl.lam * eta + u[1][0, 2, :, 0] - d_tilde
    worst = float(np.max(np.abs(res) / np.abs(d_tilde)))
    ok = worst < 1e-10
    verdict(5, "kinematic identity", ok, f"worst {worst:.1e} over 1000 points")
    assert ok


def test_c06_bound_sweeps(verdict):
    t0 = time.perf_counter()
    reps = []
    for n in (2, 3):
        reps += ce.run_all(ce.SectorSampling(n=n), FP, seed=0)
    elapsed = time.perf_counter() - t0
    bounds = [r for r in reps if r.kind != "diverge"]
    controls = [r for r in reps if r.kind == "diverge"]
    bad = [r.bound_id for r in bounds if not (r.passed and np.isfinite(r.worst_ratio))]
    ok = not bad and controls and all(c.passed for c in controls) and elapsed < 60
    verdict(6, "bound sweeps", ok,
            f"{len(bounds)} reports, failing {bad or 'none'}, control growth "
            f"{controls[0].extra['sups'][-1] / controls[0].extra['sups'][0]:.1e}, {elapsed:.1f}s")
    assert ok


def test_c07_resolvent_ratio(verdict):
    g = GridSpec(n=2, N=(8,), L=(1.0,), X=40.0, Nv=600, beta=14.0)
    d = rs.InterfaceData.from_modes(g, {(1,): {"g1": 1.0, "g2": 0.5, "h1": 0.3j, "h2": 1.0}})
    radii = np.geomspace(1e-2, 1e4, 25)
    lines, ok = [], True
    for arg in (0.0, 3 * np.pi / 8, -3 * np.pi / 8):
        ratios = [rs.norms_and_ratio(rs.solve_rswithout(None, d, r * np.exp(1j * arg), FP, g), d).ratio
                  for r in radii]
        slope, spread, good = cli.ray_summary(radii, ratios, 0.05, 10.0)
        ok &= good
        lines.append(f"arg {arg:+.3f}: slope {slope:+.3f} spread {spread:.2f}")
    verdict(7, "resolvent ratio", ok, "; ".join(lines))
    assert ok


def test_c08_evolution_round_trip(verdict):
    g = GridSpec(n=2, N=(8,), L=(1.0,), X=12.0, Nv=32, beta=4.0)
    d = rs.InterfaceData.from_modes(g, {(1,): {"h2": 1.0, "h1": 0.3j, "g1": 0.2, "d": 0.5}})
    c = ev.ContourSpec(1.0, 2048, 536.0)
    times = np.linspace(0, c.period / 2, 8193)
    parts, ok = [], True
    for surface in (False, True):
        ser = ev.solve_evolution(ev.TimeData(d, ev.TimeProfile("ramp", 1.0)), c, FP, g, times, surface=surface)
        rt = ev.round_trip_error(ser, 3.0)
        cz = ev.causality_ratio(ser)
        ok &= rt < 1e-4 and cz <= 1e-3
        parts.append(f"{'with' if surface else 'without'} surface: round trip {rt:.1e}, causality {cz:.1e}")
    verdict(8, "evolution round trip", ok, "; ".join(parts))
    assert ok


def test_c09_operator_harness(verdict):
    g = GridSpec(n=2, N=(8,), L=(1.0,), X=30.0, Nv=800, beta=8.0)
    d = rs.InterfaceData.from_modes(g, {(1,): {"g1": 1 + 0.5j, "g2": 0.3, "h1": 0.2j, "h2": 0.7}})
    worst = 0.0
    for lam in (1 + 1j, 50.0):
        u, _ = op.sol1_velocity(d, lam, FP, g)
        fld = rs.boundary_solve(d, lam, FP, g)
        err = max(np.abs(u[s] - fld.u[s][0]).max() for s in (1, -1))
        worst = max(worst, err / max(np.abs(fld.u[s][0]).max() for s in (1, -1)))
    g0 = GridSpec(n=2, N=(8,), L=(1.0,), X=30.0, Nv=64, beta=6.0)
    mask = np.zeros(8, bool)
    mask[[1, 2, 7]] = True
    modes = rs.active_modes(g0, mask)
    drifts = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", op.GradedQuadratureWarning)
        for name, m in op.certified_symbols(1 + 1j, FP, 2).items():
            _, drifts[name] = op.refinement_drift(m, 2, g0, modes, levels=3)
    top = max(drifts, key=drifts.get)
    ok = worst < 1e-4 and drifts[top] < 0.1
    verdict(9, "operator harness", ok, f"integral route {worst:.1e}, max drift {drifts[top]:.2%} ({top})")
    assert ok


def test_c10_determinism(verdict, tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(yaml.safe_dump({"seed": 11}))
    blobs = {}
    for t in (1, 4, 8):
        out = tmp_path / f"t{t}"
        for cmd in ("certify", "sweep"):
            assert cli.main([cmd, "--config", str(cfg), "--out", str(out), "--threads", str(t)]) == 0
        blobs[t] = tuple((out / f).read_bytes() for f in ("certify.csv", "sweep.csv", "sweep_summary.csv"))
    ok = blobs[1] == blobs[4] == blobs[8]
    verdict(10, "determinism", ok, "certify and sweep CSVs identical for 1, 4, 8 threads" if ok else "outputs differ")
    assert ok
