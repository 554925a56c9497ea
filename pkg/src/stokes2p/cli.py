"""Command line entry point: ``stokes2p {certify,solve,evolve,sweep}``.

Exit codes: 0 success, 1 a numerical check failed, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import certifier, evolution, io, resolvent as rs, symbols as sy
from .config import ConfigError, RunConfig, complex_entry, grid_kwargs, lam_list, load_config, sector_kwargs
from .grid import GridSpec
from .parallel import ordered_map, resolve_threads

logger = logging.getLogger("stokes2p")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2

RESIDUAL_COLUMNS = ["lambda_re", "lambda_im", "equation", "method", "residual"]
RATIO_COLUMNS = ["lambda_re", "lambda_im", "q", "lhs", "rhs", "ratio", "eta_ratio"]
SWEEP_COLUMNS = ["ray_arg", "lambda_abs", "lambda_re", "lambda_im", "q", "lhs", "rhs", "ratio"]
SWEEP_SUMMARY_COLUMNS = ["ray_arg", "points", "slope", "spread", "pass"]
SERIES_COLUMNS = ["t", "velocity_norm"]
SUMMARY_COLUMNS = ["metric", "value", "threshold", "pass"]


def _fluid(cfg: RunConfig) -> sy.FluidParams:
    return sy.FluidParams(**dataclasses.asdict(cfg.fluid))


def _grid(cfg: RunConfig, **over) -> GridSpec:
    kw = grid_kwargs(cfg)
    kw.update(over)
    return GridSpec(**kw)


def build_data(cfg: RunConfig, grid: GridSpec):
    """Interface data (mode list or mode file) and optional body force."""
    if cfg.data.file is not None:
        data = io.read_modes(cfg.data.file, grid)
    else:
        data = io.modes_from_config(cfg.data.modes, grid)
    force = None
    if cfg.data.force:
        entries = {}
        for i, e in enumerate(cfg.data.force):
            k = tuple(int(c) for c in e["k"])
            if len(k) != grid.n or len(e["f"]) != grid.n:
                raise ConfigError(f"data.force[{i}] needs {grid.n} wave indices and {grid.n} components")
            entries[k] = [complex_entry(v, f"data.force[{i}].f") for v in e["f"]]
        try:
            force = rs.ForceData.from_modes(grid, entries)
        except IndexError as exc:
            raise ConfigError(f"data.force: {exc}") from exc
    return data, force


def _solver(cfg):
    return rs.solve_rswith if cfg.problem.surface else rs.solve_rswithout


def cmd_certify(cfg: RunConfig, out: Path, threads: int) -> int:
    fp = _fluid(cfg)
    sampling = certifier.SectorSampling(**sector_kwargs(cfg))
    tol = certifier.Tolerances(cfg.tolerances.ceiling, cfg.tolerances.floor)
    reports = certifier.run_all(sampling, fp, cfg.seed, threads, tol)
    io.write_csv(out / "certify.csv", certifier.REPORT_COLUMNS, [r.row() for r in reports], cfg.hash())
    failed = [r.bound_id for r in reports if not r.passed]
    for r in reports:
        logger.info("%-32s worst %.3e %s", r.bound_id, r.worst_ratio, "ok" if r.passed else "FAIL")
    if failed:
        logger.error("failed bounds: %s", ", ".join(failed))
        return EXIT_CHECK
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out: Path, threads: int) -> int:
    fp = _fluid(cfg)
    grid = _grid(cfg)
    data, force = build_data(cfg, grid)
    solver = _solver(cfg)
    lams = lam_list(cfg)

    def one(lam):
        fld = solver(force, data, lam, fp, grid)
        return fld, rs.residual_report(fld, data), rs.norms_and_ratio(fld, data, cfg.problem.q,
                                                                     extension=cfg.problem.extension)

    try:
        results = ordered_map(one, lams, threads)
    except sy.LopatinskiiDegeneracyError as exc:
        logger.error("%s", exc)
        return EXIT_CHECK
    res_rows, ratio_rows = [], []
    worst = 0.0
    for k, (lam, (fld, rep, rat)) in enumerate(zip(lams, results)):
        for key, v in rep.spectral.items():
            res_rows.append([lam.real, lam.imag, key, "spectral", v])
        for key, v in rep.fd.items():
            res_rows.append([lam.real, lam.imag, key, "fd", v])
        worst = max(worst, rep.worst_spectral())
        ratio_rows.append([lam.real, lam.imag, cfg.problem.q, rat.lhs, rat.rhs, rat.ratio,
                           "" if rat.eta_ratio is None else rat.eta_ratio])
        if cfg.problem.dump_fields:
            io.write_field(out / f"field_{k:03d}.bin", fld)
    h = cfg.hash()
    io.write_csv(out / "residuals.csv", RESIDUAL_COLUMNS, res_rows, h)
    io.write_csv(out / "ratios.csv", RATIO_COLUMNS, ratio_rows, h)
    if worst > cfg.tolerances.residual:
        logger.error("worst spectral residual %.3e above %.1e", worst, cfg.tolerances.residual)
        return EXIT_CHECK
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, out: Path, threads: int) -> int:
    fp = _fluid(cfg)
    grid = _grid(cfg)
    data, force = build_data(cfg, grid)
    contour = evolution.ContourSpec(cfg.contour.gamma, cfg.contour.nodes, cfg.contour.tau_max)
    profile = evolution.TimeProfile(cfg.profile.kind, cfg.profile.rate)
    if cfg.time.T > contour.period / 2:
        logger.warning("T = %g exceeds half the contour period %.3g; late times alias", cfg.time.T,
                       contour.period / 2)
    times = np.linspace(0.0, cfg.time.T, cfg.time.N_t)
    td = evolution.TimeData(data, profile, force)
    try:
        series = evolution.solve_evolution(td, contour, fp, grid, times, surface=cfg.problem.surface,
                                           threads=threads)
    except evolution.GrowthRateError as exc:
        logger.error("%s", exc)
        return EXIT_CHECK
    tol = cfg.tolerances
    lam_star = 3.0 * contour.gamma
    rt = evolution.round_trip_error(series, lam_star)
    cz = evolution.causality_ratio(series)
    mr = evolution.maxreg_ratio(series, 2, cfg.problem.q)
    summary = [
        ["round_trip_error", rt, tol.round_trip, rt < tol.round_trip],
        ["causality_ratio", cz, tol.causality, cz < tol.causality],
        ["maxreg_ratio", mr.ratio, tol.ceiling, bool(np.isfinite(mr.ratio) and mr.ratio < tol.ceiling)],
    ]
    h = cfg.hash()
    norms = series.norm_series()
    io.write_csv(out / "evolve.csv", SERIES_COLUMNS, [[t, v] for t, v in zip(times, norms)], h)
    io.write_csv(out / "evolve_summary.csv", SUMMARY_COLUMNS, summary, h)
    return EXIT_OK if all(r[-1] for r in summary) else EXIT_CHECK


def sweep_points(cfg: RunConfig):
    sw = cfg.sweep
    radii = np.geomspace(sw.r_min, sw.r_max, sw.count)
    return [(float(a), float(r), complex(r * np.exp(1j * a))) for a in sw.rays for r in radii]


def ray_summary(radii, ratios, tol_slope, tol_spread):
    """Log-log slope and max/min spread of the ratio along one ray."""
    radii, ratios = np.asarray(radii), np.asarray(ratios)
    ok = np.isfinite(ratios) & (ratios > 0)
    if ok.sum() < 2:
        return float("nan"), float("inf"), False
    slope = float(np.polyfit(np.log(radii[ok]), np.log(ratios[ok]), 1)[0])
    spread = float(ratios[ok].max() / ratios[ok].min())
    return slope, spread, bool(ok.all() and abs(slope) <= tol_slope and spread <= tol_spread)


def cmd_sweep(cfg: RunConfig, out: Path, threads: int) -> int:
    fp = _fluid(cfg)
    sw = cfg.sweep
    grid = _grid(cfg, X=sw.X, Nv=sw.Nv, beta=sw.beta)
    data, force = build_data(cfg, grid)
    solver = _solver(cfg)
    pts = sweep_points(cfg)

    def one(p):
        fld = solver(force, data, p[2], fp, grid)
        return rs.norms_and_ratio(fld, data, cfg.problem.q, extension=cfg.problem.extension)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", rs.ZeroModeWarning)
        reps = ordered_map(one, pts, threads)
    rows = [[a, r, lam.real, lam.imag, cfg.problem.q, rep.lhs, rep.rhs, rep.ratio]
            for (a, r, lam), rep in zip(pts, reps)]
    summ = []
    for a in sw.rays:
        sel = [(r, rep.ratio) for (aa, r, _), rep in zip(pts, reps) if aa == float(a)]
        slope, spread, ok = ray_summary([s[0] for s in sel], [s[1] for s in sel], cfg.tolerances.slope,
                                        cfg.tolerances.spread)
        summ.append([float(a), len(sel), slope, spread, ok])
    h = cfg.hash()
    io.write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows, h)
    io.write_csv(out / "sweep_summary.csv", SWEEP_SUMMARY_COLUMNS, summ, h)
    return EXIT_OK if all(s[-1] for s in summ) else EXIT_CHECK


COMMANDS = {"certify": cmd_certify, "solve": cmd_solve, "evolve": cmd_evolve, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stokes2p", description="Two-phase Stokes resolvent and evolution harness")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, help="worker threads (default: $STOKES2P_THREADS or 1)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        try:
            threads = resolve_threads(args.threads)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, threads)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
