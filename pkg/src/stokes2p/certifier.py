"""Empirical verification of the symbol bounds on sampled complex sectors.

Each check evaluates a ratio at every sample and reduces it to the worst
case (``max`` for ceilings, ``min`` for floors).  Evaluation is chunked with
a fixed chunk size so that reports are bit-identical for any thread count.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import symbols as sy
from .parallel import chunk_ranges, ordered_map

logger = logging.getLogger(__name__)

CHUNK = 2048
DELTA = 1e-3


@dataclass(frozen=True)
class SectorSampling:
    """Product grid over ``|lam|``, ``arg lam``, ``A_tilde``, frequency direction and ``x_n``."""

    n: int = 3
    epsilon: float = np.pi / 4
    eta: float = np.pi / 16
    gamma0: float = 1.0
    n_radii: int = 8
    n_angles: int = 5
    n_xi_radii: int = 10
    n_xi_angles: int = 5
    n_xn: int = 5
    radius_range: tuple = (1.0, 1e4)
    xi_range: tuple = (1e-3, 1e3)
    xn_range: tuple = (1e-3, 1e2)
    jitter: float = 0.1
    delta: float = DELTA

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.n not in (2, 3):
            raise ValueError("n must be 2 or 3")
        if not 0 < self.epsilon < np.pi / 2:
            raise ValueError("epsilon must lie in (0, pi/2)")
        if not 0 < self.eta < min(np.pi / 4, self.epsilon / 2):
            raise ValueError("eta must lie in (0, min(pi/4, epsilon/2))")
        if self.gamma0 < 0:
            raise ValueError("gamma0 must be non-negative")
        for name in ("n_radii", "n_angles", "n_xi_radii", "n_xi_angles", "n_xn"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("radius_range", "xi_range", "xn_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must satisfy 0 < min <= max")
        if self.radius_range[0] < self.gamma0:
            raise ValueError("radius_range starts below gamma0")
        if not 0 < self.delta < self.eta:
            raise ValueError("delta must lie in (0, eta)")
        if self.jitter < 0:
            raise ValueError("jitter must be non-negative")

    @property
    def size(self) -> int:
        return self.n_radii * self.n_angles * self.n_xi_radii * self.n_xi_angles * self.n_xn


@dataclass
class SampleSet:
    """Flat arrays of sample points; ``xi_n`` is a complexified normal frequency."""

    n: int
    lam: np.ndarray
    xi: np.ndarray
    x_n: np.ndarray
    xi_n: np.ndarray

    def __len__(self):
        return len(self.lam)

    def __getitem__(self, sl) -> "SampleSet":
        return SampleSet(self.n, self.lam[sl], self.xi[sl], self.x_n[sl], self.xi_n[sl])

    def point(self) -> sy.SpectralPoint:
        return sy.SpectralPoint(self.lam, self.xi)

    def as_list(self) -> list:
        return [(sy.SpectralPoint(l, x), xn) for l, x, xn in zip(self.lam, self.xi, self.x_n)]


def _grid1d(lo, hi, count, log=True):
    if count == 1:
        return np.array([lo], float)
    return np.geomspace(lo, hi, count) if log else np.linspace(lo, hi, count)


def _lobe_angles(count, eta, delta):
    """Angles alternating between the lobe around 0 and the lobe around pi."""
    if count == 1:
        return np.zeros(1)
    base = np.linspace(-(eta - delta), eta - delta, count)
    return base + np.where(np.arange(count) % 2 == 1, np.pi, 0.0)


def sample_sectors(cfg: SectorSampling, seed: int = 0) -> SampleSet:
    """Seeded product grid plus multiplicative/angular jitter.

    The extreme rays ``arg lam = +-(pi - epsilon - delta)`` and both frequency
    lobes are kept exactly; jitter only moves interior grid values.
    """
    cfg.validate()
    rng = np.random.default_rng(seed)
    amax = np.pi - cfg.epsilon - cfg.delta
    lr = _grid1d(*cfg.radius_range, cfg.n_radii)
    la = _grid1d(-amax, amax, cfg.n_angles, log=False) if cfg.n_angles > 1 else np.zeros(1)
    xr = _grid1d(*cfg.xi_range, cfg.n_xi_radii)
    xa = _lobe_angles(cfg.n_xi_angles, cfg.eta, cfg.delta)
    xn = _grid1d(*cfg.xn_range, cfg.n_xn)
    I = np.indices((cfg.n_radii, cfg.n_angles, cfg.n_xi_radii, cfg.n_xi_angles, cfg.n_xn)).reshape(5, -1)
    N = I.shape[1]
    r, a, rx, ia, x = lr[I[0]], la[I[1]], xr[I[2]], I[3], xn[I[4]]
    if cfg.jitter > 0:
        def jit(values, count, lo, hi):
            if count == 1:
                return values
            step = np.log(hi / lo) / (count - 1)
            return np.clip(values * np.exp(cfg.jitter * step * rng.uniform(-0.5, 0.5, N)), lo, hi)

        r = jit(r, cfg.n_radii, *cfg.radius_range)
        rx = jit(rx, cfg.n_xi_radii, *cfg.xi_range)
        x = jit(x, cfg.n_xn, *cfg.xn_range)
        interior = (I[1] > 0) & (I[1] < cfg.n_angles - 1)
        if cfg.n_angles > 1:
            da = 2 * amax / (cfg.n_angles - 1)
            a = np.where(interior, a + cfg.jitter * da * rng.uniform(-0.5, 0.5, N), a)
        r = np.maximum(r, cfg.gamma0)
    lam = r * np.exp(1j * a)
    th = xa[ia]
    if cfg.n == 2:
        xi = (rx * np.exp(1j * th))[:, None]
    else:
        th2 = xa[(ia + 1) % cfg.n_xi_angles]
        split = _grid1d(0.1, np.pi / 2 - 0.1, cfg.n_xi_angles, log=False)[(ia + I[0]) % cfg.n_xi_angles]
        xi = np.stack([rx * np.cos(split) * np.exp(1j * th), rx * np.sin(split) * np.exp(1j * th2)], axis=-1)
    th_n = xa[(ia + I[4]) % cfg.n_xi_angles]
    xi_n = rx[::-1] * np.exp(1j * th_n)
    return SampleSet(cfg.n, lam, xi, x, xi_n)


@dataclass
class BoundReport:
    """Worst-case ratio of one bound over a sample set, with its witness point."""

    bound_id: str
    n: int
    samples: int
    worst_ratio: float
    lam: complex
    xi: np.ndarray
    x_n: float
    kind: str
    passed: bool
    extra: dict = field(default_factory=dict)

    @property
    def pass_(self) -> bool:
        return self.passed

    def row(self) -> list:
        xi = ";".join(f"{z.real:.12e}{z.imag:+.12e}j" for z in np.atleast_1d(self.xi))
        return [self.bound_id, self.n, self.samples, f"{self.worst_ratio:.12e}", f"{self.lam.real:.12e}",
                f"{self.lam.imag:.12e}", xi, f"{self.x_n:.12e}", str(bool(self.passed)).lower()]


REPORT_COLUMNS = ["bound_id", "n", "sample_count", "worst_ratio", "lambda_re", "lambda_im", "xi", "x_n", "pass"]


@dataclass(frozen=True)
class Tolerances:
    ceiling: float = 1e6
    floor: float = 1e-6


def _reduce(bound_id, values, kind, samples: SampleSet, tol: Tolerances) -> BoundReport:
    v = np.asarray(values, float)
    bad = ~np.isfinite(v)
    if np.any(bad):
        i = int(np.argmax(bad))
        worst = float(v[i]) if not np.isnan(v[i]) else float("nan")
        ok = False
    elif kind == "max":
        i = int(np.argmax(v))
        worst = float(v[i])
        ok = worst < tol.ceiling
    else:
        i = int(np.argmin(v))
        worst = float(v[i])
        ok = worst > tol.floor
    return BoundReport(bound_id, samples.n, len(v), worst, complex(samples.lam[i]), samples.xi[i],
                       float(samples.x_n[i]), kind, bool(ok))


def _sweep(samples: SampleSet, fn, threads: int, tol: Tolerances) -> list:
    """Apply ``fn(chunk) -> {id: (values, kind)}`` chunk-wise and reduce in a fixed order."""
    parts = ordered_map(lambda r: fn(samples[r[0]:r[1]]), chunk_ranges(len(samples), CHUNK), threads)
    out = []
    for key in parts[0]:
        kind = parts[0][key][1]
        vals = np.concatenate([p[key][0] for p in parts])
        out.append(_reduce(key, vals, kind, samples, tol))
    return out


def _scale(tbl):
    return np.sqrt(np.abs(tbl.lam)) + tbl.A_tilde


# --------------------------------------------------------------------------
# individual checks
# --------------------------------------------------------------------------


def _root_values(ch: SampleSet, fp):
    tbl = sy.build_symbol_table(ch.point(), fp)
    P, At, x = _scale(tbl), tbl.A_tilde, ch.x_n
    out = {
        "root_reA_over_At": (tbl.A.real / At, "min"),
        "root_reBp_over_P": (tbl.B_plus.real / P, "min"),
        "root_reBm_over_P": (tbl.B_minus.real / P, "min"),
        "root_absBp_over_P": (np.abs(tbl.B_plus) / P, "max"),
        "root_absBm_over_P": (np.abs(tbl.B_minus) / P, "max"),
        "root_absS_over_P": (np.abs(tbl.S) / P, "min"),
    }
    for m in range(4):
        ea, mm, eb = [], [], []
        for s in (1, -1):
            B = tbl.B(s)
            ea.append(np.abs(sy.exp_kernel(tbl.A, s * x, s, m)) * x * At ** (1 - m))
            mm.append(np.abs(sy.m_kernel(tbl.A, B, s * x, s, m)) * x * P ** (2 - m))
            eb.append(np.abs(sy.exp_kernel(B, s * x, s, m)) * x * P ** (1 - m))
        out[f"kernel_expA_m{m}"] = (np.maximum(*ea), "max")
        out[f"kernel_M_m{m}"] = (np.maximum(*mm), "max")
        out[f"kernel_expB_m{m}"] = (np.maximum(*eb), "max")
    return out


def check_root_bounds(samples: SampleSet, fp: sy.FluidParams, threads: int = 1, tol=Tolerances()) -> list:
    """Root comparisons and the kernel envelopes ``|d^m K| |x_n| <~ scale^{m-1-...}``."""
    return _sweep(samples, lambda ch: _root_values(ch, fp), threads, tol)


def a_weight_exponents(n: int):
    """Exponents ``(alpha, beta)`` with ``|(det L) a_{ij}| <~ A_tilde^alpha P^beta``."""
    alpha = np.zeros((4, 2 * n), int)
    beta = np.zeros((4, 2 * n), int)
    for i in range(4):
        outer = i in (0, 2)
        alpha[i, :n], beta[i, :n] = 1, 2 if outer else 1
        alpha[i, n:2 * n - 1], beta[i, n:2 * n - 1] = 1, 3 if outer else 2
        alpha[i, 2 * n - 1], beta[i, 2 * n - 1] = 0, 4 if outer else 3
    return alpha, beta


def _cofactor_values(ch, fp):
    tbl = sy.build_symbol_table(ch.point(), fp)
    P, At = _scale(tbl), tbl.A_tilde
    p = sy.adjugate_growth_exponents()
    adj = tbl.adjugate
    out = {}
    for i in range(4):
        for s in range(4):
            out[f"adj_{i + 1}{s + 1}"] = (np.abs(adj[:, i, s]) / P ** p[i, s], "max")
    num = adj @ tbl.R
    al, be = a_weight_exponents(tbl.n)
    for i in range(4):
        for j in range(2 * tbl.n):
            out[f"adjR_{i + 1}_{j + 1}"] = (np.abs(num[:, i, j]) / (At ** al[i, j] * P ** be[i, j]), "max")
    return out


def check_cofactor_growth(samples, fp, threads=1, tol=Tolerances()) -> list:
    """Adjugate entries and ``adj(L) R`` against the tabulated growth powers."""
    return _sweep(samples, lambda ch: _cofactor_values(ch, fp), threads, tol)


def check_detL_lower(samples, fp, threads=1, tol=Tolerances()) -> list:
    def fn(ch):
        tbl = sy.build_symbol_table(ch.point(), fp)
        return {"detL_lower": (np.abs(tbl.detL_closed) / _scale(tbl) ** 3, "min")}

    return _sweep(samples, fn, threads, tol)


def _symbol_values(ch, fp):
    tbl = sy.build_symbol_table(ch.point(), fp)
    n = tbl.n
    x = ch.x_n
    al = np.abs(tbl.lam)
    xmax = np.abs(tbl.xi).max(axis=-1)
    w0 = al + np.sqrt(al) * xmax + xmax ** 2
    w1 = np.sqrt(al) + xmax
    out = {}
    for v in range(1, 7):
        ms = range(1, n) if v in (2, 6) else [None]
        r0 = r1 = r2 = 0.0
        for s in (1, -1):
            for k in range(1, n + 1):
                for j in range(1, n + 1):
                    for m in ms:
                        vals = [np.abs(sy.s_family_value(tbl, "S_u", v, k, s, s * x, j=j, m=m, order=o))
                                for o in range(3)]
                        r0 = np.maximum(r0, w0 * vals[0] * x)
                        r1 = np.maximum(r1, w1 * vals[1] * x)
                        r2 = np.maximum(r2, vals[2] * x)
        out[f"Su_v{v}_o0"] = (r0, "max")
        out[f"Su_v{v}_o1"] = (r1, "max")
        out[f"Su_v{v}_o2"] = (r2, "max")
        rt = 0.0
        for s in (1, -1):
            for k in range(1, n + 1):
                if v == 5 and k == n:
                    continue
                for m in ms:
                    a0 = np.abs(sy.s_family_value(tbl, "S_theta", v, k, s, s * x, m=m))
                    a1 = np.abs(sy.s_family_value(tbl, "S_theta", v, k, s, s * x, m=m, order=1))
                    rt = np.maximum(rt, (xmax * a0 + a1) * x)
        out[f"Stheta_v{v}"] = (rt, "max")
    ro = 0.0
    for s in (1, -1):
        a0 = np.abs(sy.omega_n_weighted(tbl, s, s * x))
        a1 = np.abs(sy.omega_n_weighted(tbl, s, s * x, 1))
        ro = np.maximum(ro, (xmax * a0 + a1) * x)
    out["Stheta_omega_n_weighted"] = (ro, "max")
    return out


def check_symbol_estimate(samples, fp, threads=1, tol=Tolerances()) -> list:
    """Weighted sup of every S^u and S^theta member times ``|x_n|``."""
    return _sweep(samples, lambda ch: _symbol_values(ch, fp), threads, tol)


def unweighted_omega_n(tbl: sy.SymbolTable, side, x_n, order=0):
    """The member left out of S^theta variant 5, evaluated anyway for the control experiment."""
    s = sy.normalize_side(side)
    B = tbl.B(s)
    pre = tbl.fp.rho(s) / tbl.fp.mu(s) * np.sqrt(tbl.lam) / (B * B)
    return pre * sy.pressure_value(tbl, "omega", tbl.n, s, x_n, order)


def omega_n_control(fp: sy.FluidParams, n: int = 2, lam: complex = 1.0,
                    at_values=None, x_values=None, tol=Tolerances()) -> BoundReport:
    """Negative control: sup over ``x_n`` of the unweighted omega_n estimate as ``A_tilde -> 0``.

    ``passed`` is true when the sequence of sups grows by more than a factor
    of 10 over the refinement, i.e. when the bound fails as expected.
    """
    at_values = np.geomspace(1.0, 1e-4, 9) if at_values is None else np.asarray(at_values)
    x_values = np.geomspace(1e-4, 1e7, 400) if x_values is None else np.asarray(x_values)
    sups = []
    for a in at_values:
        xi = np.zeros((len(x_values), n - 1), complex)
        xi[:, 0] = a
        tbl = sy.build_symbol_table(sy.SpectralPoint(np.full(len(x_values), lam, complex), xi), fp)
        xm = a
        worst = 0.0
        for s in (1, -1):
            v0 = np.abs(unweighted_omega_n(tbl, s, s * x_values))
            v1 = np.abs(unweighted_omega_n(tbl, s, s * x_values, 1))
            worst = max(worst, float(np.max((xm * v0 + v1) * x_values)))
        sups.append(worst)
    sups = np.array(sups)
    growth = sups[-1] / sups[0]
    slope = np.polyfit(np.log(at_values), np.log(sups), 1)[0]
    rep = BoundReport("control_omega_n_unweighted", n, len(at_values) * len(x_values), float(sups[-1]),
                      complex(lam), np.array([at_values[-1]], complex), float("nan"), "diverge",
                      bool(growth > 10), {"sups": sups, "A_tilde": at_values, "slope": slope})
    return rep


def check_lopatinskii_lower(samples, fp, threads=1, tol=Tolerances()) -> list:
    """``min |Lop| / ((|lam| + A_tilde) P^3)``; needs ``|lam| >= 1`` and both surface constants positive."""
    if fp.c_sigma <= 0 or fp.c_g <= 0:
        raise ValueError("the surface symbol floor needs c_sigma > 0 and c_g > 0")
    if np.min(np.abs(samples.lam)) < 1 - 1e-9:
        raise ValueError("the surface symbol floor needs |lambda| >= 1")

    def fn(ch):
        tbl = sy.build_symbol_table(ch.point(), fp)
        den = (np.abs(tbl.lam) + tbl.A_tilde) * _scale(tbl) ** 3
        return {"lopatinskii_lower": (np.abs(tbl.lopatinskii) / den, "min")}

    return _sweep(samples, fn, threads, tol)


def check_appendixA(samples, fp, threads=1, tol=Tolerances()) -> list:
    """Sup modulus of the whole-space multipliers over complexified full frequencies."""

    def fn(ch):
        xi_full = np.concatenate([ch.xi, ch.xi_n[:, None]], axis=-1)
        worst = np.zeros(len(ch))
        for k in range(1, ch.n + 1):
            for s in (1, -1):
                worst = np.maximum(worst, np.abs(sy.appendixA_symbol(xi_full, ch.lam, fp, k, s)))
        return {"appendixA_sup": (worst, "max")}

    return _sweep(samples, fn, threads, tol)


def run_all(cfg: SectorSampling, fp: sy.FluidParams, seed: int = 0, threads: int = 1,
            tol: Tolerances = Tolerances()) -> list:
    """Every check on one seeded sample set, in a fixed order."""
    samples = sample_sectors(cfg, seed)
    reports = []
    reports += check_root_bounds(samples, fp, threads, tol)
    reports += check_cofactor_growth(samples, fp, threads, tol)
    reports += check_detL_lower(samples, fp, threads, tol)
    reports += check_symbol_estimate(samples, fp, threads, tol)
    if fp.c_sigma > 0 and fp.c_g > 0 and cfg.gamma0 >= 1:
        reports += check_lopatinskii_lower(samples, fp, threads, tol)
    else:
        logger.info("surface symbol floor skipped (needs c_sigma, c_g > 0 and gamma0 >= 1)")
    reports += check_appendixA(samples, fp, threads, tol)
    reports.append(omega_n_control(fp, cfg.n, tol=tol))
    return reports
