"""Time-dependent problems by quadrature of the inverse Laplace transform.

The inversion runs along the vertical line ``lam = gamma + i tau`` with the
trapezoid rule on a uniform ``tau`` grid.  With spacing ``dtau`` the
reconstruction is periodic (up to sign) with period ``P = 2 pi / dtau`` after
removing ``exp(gamma t)``; causal data alias back with weight
``exp(-gamma P)``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import resolvent as rs
from . import symbols as sy
from .parallel import ordered_map

logger = logging.getLogger(__name__)


class GrowthRateError(ValueError):
    """Contour abscissa does not exceed the exponential growth rate of the data."""


class TruncationWarning(UserWarning):
    """Integrand has not decayed at the end of the truncated contour."""


@dataclass(frozen=True)
class ContourSpec:
    """Uniform trapezoid nodes on ``gamma + i [-tau_max, tau_max]``."""

    gamma: float = 1.0
    nodes: int = 2048
    tau_max: float = 536.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.nodes < 2 or self.nodes % 2:
            raise ValueError("node count must be even and >= 2")
        if not self.tau_max > 0:
            raise ValueError("tau_max must be positive")

    @property
    def dtau(self) -> float:
        return 2 * self.tau_max / self.nodes

    @property
    def period(self) -> float:
        return 2 * np.pi / self.dtau

    @property
    def tau(self) -> np.ndarray:
        return (np.arange(self.nodes) - (self.nodes - 1) / 2) * self.dtau

    @property
    def lam(self) -> np.ndarray:
        return self.gamma + 1j * self.tau

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.nodes, self.dtau)

    def kernel(self, t) -> np.ndarray:
        """Matrix ``w_m exp(lam_m t) / (2 pi)`` of shape ``(len(t), nodes)``."""
        t = np.atleast_1d(np.asarray(t, float))
        return np.exp(np.outer(t, self.lam)) * self.weights / (2 * np.pi)


@dataclass(frozen=True)
class TimeProfile:
    """Scalar time factor of separable data ``F(x, t) = p(t) F(x)``; zero for ``t < 0``.

    Kinds: ``step`` (1), ``step_exp`` (``exp(rate t)``), ``ramp``
    (``1 - exp(-rate t)``), ``bump`` (``t^2 exp(-rate t)``), ``sampled``
    (values on ``t_samples`` with trapezoid transform).
    """

    kind: str = "ramp"
    rate: float = 1.0
    t_samples: tuple = ()
    values: tuple = ()
    growth: float | None = None

    def __post_init__(self):
        if self.kind not in ("step", "step_exp", "ramp", "bump", "sampled"):
            raise ValueError(f"unknown time profile {self.kind!r}")
        if self.kind in ("ramp", "bump") and not self.rate > 0:
            raise ValueError("ramp and bump need a positive rate")
        if self.kind == "sampled" and len(self.t_samples) != len(self.values):
            raise ValueError("sampled profile needs matching t and values")

    @property
    def growth_rate(self) -> float:
        if self.growth is not None:
            return float(self.growth)
        return {"step": 0.0, "step_exp": self.rate, "ramp": 0.0, "bump": -self.rate, "sampled": 0.0}[self.kind]

    def __call__(self, t):
        t = np.asarray(t, float)
        on = t >= 0
        if self.kind == "step":
            v = np.ones_like(t)
        elif self.kind == "step_exp":
            v = np.exp(self.rate * t)
        elif self.kind == "ramp":
            v = -np.expm1(-self.rate * t)
        elif self.kind == "bump":
            v = t ** 2 * np.exp(-self.rate * t)
        else:
            v = np.interp(t, self.t_samples, self.values, right=0.0)
        return np.where(on, v, 0.0)

    def transform(self, lam):
        """Laplace transform at ``lam``; closed form except for sampled data."""
        lam = np.asarray(lam, complex)
        if self.kind == "step":
            return 1 / lam
        if self.kind == "step_exp":
            return 1 / (lam - self.rate)
        if self.kind == "ramp":
            return self.rate / (lam * (lam + self.rate))
        if self.kind == "bump":
            return 2 / (lam + self.rate) ** 3
        return quadrature_transform(np.asarray(self.t_samples), np.asarray(self.values), lam)


def quadrature_transform(t, values, lam):
    """Trapezoid approximation of ``int exp(-lam t) v(t) dt`` over the sample range."""
    lam = np.atleast_1d(np.asarray(lam, complex))
    integrand = np.exp(-np.outer(lam, t)) * values
    out = _trapz(integrand, t, axis=-1)
    return out if out.size > 1 else out[0]


def _trapz(y, x, axis=-1):
    fn = getattr(np, "trapezoid", None) or np.trapz
    return fn(y, x, axis=axis)


@dataclass
class TimeData:
    """Separable interface (and optional body-force) data with one time profile."""

    spatial: rs.InterfaceData
    profile: TimeProfile
    force: rs.ForceData | None = None


def laplace_of_data(data: TimeData, lam):
    """Interface and force data of the resolvent problem at ``lam``."""
    c = complex(data.profile.transform(lam))
    f = None if data.force is None else rs.ForceData(data.force.grid, c * data.force.f_hat)
    return data.spatial * c, f


@dataclass
class TimeSeriesField:
    """Resolvent solutions on the contour plus the assembled time series.

    ``nodes_u[s]`` has shape ``(nodes, 3, n, M, Nv+1)``, ``nodes_theta[s]``
    ``(nodes, 2, M, Nv+1)`` and ``nodes_eta`` ``(nodes, M)`` when present.
    """

    contour: ContourSpec
    times: np.ndarray
    grid: object
    fp: sy.FluidParams
    modes: rs.ModeSet
    nodes_u: dict
    nodes_theta: dict
    nodes_eta: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def assemble(self, arr, times=None, multiplier=None):
        """``(1/2 pi) sum_m w_m m(lam_m) exp(lam_m t) arr_m`` for every time."""
        times = self.times if times is None else np.asarray(times)
        K = self.contour.kernel(times)
        if multiplier is not None:
            K = K * multiplier
        return np.tensordot(K, arr, axes=(1, 0))

    def u(self, side, order=0, times=None, multiplier=None):
        s = sy.normalize_side(side)
        return self.assemble(self.nodes_u[s][:, order], times, multiplier)

    def theta(self, side, order=0, times=None, multiplier=None):
        s = sy.normalize_side(side)
        return self.assemble(self.nodes_theta[s][:, order], times, multiplier)

    def eta(self, times=None, multiplier=None):
        return None if self.nodes_eta is None else self.assemble(self.nodes_eta, times, multiplier)

    def norm_series(self, times=None) -> np.ndarray:
        """Euclidean norm of all velocity coefficients at each time."""
        tot = 0.0
        for s in rs.SIDES:
            v = self.u(s, 0, times)
            tot = tot + np.sum(np.abs(v.reshape(v.shape[0], -1)) ** 2, axis=1)
        return np.sqrt(tot)


def solve_evolution(data: TimeData, contour: ContourSpec, fp: sy.FluidParams, grid=None, times=None, *,
                    surface: bool = False, threads: int = 1, tail_tol: float = 1e-3) -> TimeSeriesField:
    """Inverse-Laplace quadrature of resolvent solutions for separable data.

    Raises
    ------
    GrowthRateError
        If ``gamma`` does not exceed the growth rate of the time profile.
    """
    grid = data.spatial.grid if grid is None else grid
    if contour.gamma <= data.profile.growth_rate:
        raise GrowthRateError(
            f"contour abscissa {contour.gamma} must exceed the data growth rate {data.profile.growth_rate}")
    if times is None:
        times = np.linspace(0.0, contour.period / 2, 1025)
    solver = rs.solve_rswith if surface else rs.solve_rswithout
    fsupp = None if data.force is None else data.force.support()
    modes = rs.active_modes(grid, data.spatial.support(), fsupp)

    def one(lam):
        d, f = laplace_of_data(data, lam)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", rs.ZeroModeWarning)
            fld = solver(f, d, lam, fp, grid)
        if not np.array_equal(fld.modes.idx, modes.idx):
            fld = rs._align(fld, modes)
        return fld

    fields = ordered_map(one, contour.lam, threads)
    nodes_u = {s: np.stack([f.u[s] for f in fields]) for s in rs.SIDES}
    nodes_th = {s: np.stack([f.theta[s] for f in fields]) for s in rs.SIDES}
    nodes_eta = np.stack([f.eta_hat for f in fields]) if surface else None
    mag = np.array([np.abs(f.u[1][0]).max(initial=0.0) for f in fields])
    if mag.size and mag.max() > 0:
        tail = max(mag[0], mag[-1]) / mag.max()
        if tail > tail_tol:
            warnings.warn(f"contour integrand not decayed at truncation (relative tail {tail:.2e})",
                          TruncationWarning, stacklevel=2)
    return TimeSeriesField(contour, np.asarray(times, float), grid, fp, modes, nodes_u, nodes_th, nodes_eta,
                           {"data": data, "surface": surface})


def laplace_of_series(series: TimeSeriesField, lam_star, arr, *, method: str = "quadrature",
                      times=None):
    """Laplace transform at ``lam_star`` of the time series assembled from contour values ``arr``.

    ``method='quadrature'`` integrates sampled values with the trapezoid rule
    over ``times``; ``'exact'`` integrates the exponential sum analytically
    over ``[0, times[-1]]``.
    """
    times = series.times if times is None else np.asarray(times)
    if method == "quadrature":
        vals = series.assemble(arr, times)
        wt = np.exp(-lam_star * times)
        return _trapz(vals * wt.reshape((-1,) + (1,) * (vals.ndim - 1)), times, axis=0)
    if method == "exact":
        lam = series.contour.lam
        T = times[-1]
        fac = np.expm1((lam - lam_star) * T) / (lam - lam_star) * series.contour.weights / (2 * np.pi)
        return np.tensordot(fac, arr, axes=(0, 0))
    raise ValueError(f"unknown method {method!r}")


def round_trip_error(series: TimeSeriesField, lam_star: complex, *, method="quadrature", times=None) -> float:
    """Relative gap between the transformed series and a direct resolvent solve at ``lam_star``."""
    data = series.meta["data"]
    solver = rs.solve_rswith if series.meta["surface"] else rs.solve_rswithout
    d, f = laplace_of_data(data, lam_star)
    direct = solver(f, d, lam_star, series.fp, series.grid)
    if not np.array_equal(direct.modes.idx, series.modes.idx):
        direct = rs._align(direct, series.modes)
    num = den = 0.0
    for s in rs.SIDES:
        got = laplace_of_series(series, lam_star, series.nodes_u[s][:, 0], method=method, times=times)
        num += np.sum(np.abs(got - direct.u[s][0]) ** 2)
        den += np.sum(np.abs(direct.u[s][0]) ** 2)
    return float(np.sqrt(num / den)) if den > 0 else float(np.sqrt(num))


def causality_ratio(series: TimeSeriesField) -> float:
    """``||U(0)|| / max_t ||U(t)||`` on the series time grid."""
    norms = series.norm_series(np.concatenate([[0.0], series.times]))
    return float(norms[0] / norms[1:].max()) if norms[1:].max() > 0 else 0.0


# --------------------------------------------------------------------------
# maximal-regularity ratio
# --------------------------------------------------------------------------


@dataclass
class MaxRegReport:
    lhs: float
    rhs: float
    ratio: float
    terms: dict


def _time_norm(vals_t, times, gamma, p):
    w = np.exp(-gamma * times)
    if p == np.inf:
        return float(np.max(w * vals_t))
    return float(_trapz((w * vals_t) ** p, times) ** (1 / p))


def maxreg_ratio(series: TimeSeriesField, p: float = 2, q: float = 2, gamma: float | None = None, *,
                 extension="tangential", plancherel: bool = False) -> MaxRegReport:
    """LHS/RHS of the maximal-regularity estimate for separable data.

    LHS: ``d_t U``, ``gamma U``, ``Lambda^(1/2) grad U``, ``grad^2 U``,
    ``grad Theta``; RHS: ``Lambda^(1/2) G``, ``grad G``, ``d_t H``,
    ``grad^2 H``, ``d_t |grad'|^-1 d_n H_n``.  Time derivatives and the half
    power act as the multipliers ``lam`` and ``|lam|^(1/2)`` on the contour.
    With ``plancherel=True`` (only ``p = q = 2``) the time integrals are
    replaced by sums over the contour nodes.
    """
    c = series.contour
    gamma = c.gamma if gamma is None else gamma
    if plancherel and not (p == 2 and q == 2):
        raise ValueError("the frequency-side evaluation needs p = q = 2")
    grid, modes = series.grid, series.modes
    norm = rs._Norm(grid, modes, q)
    lam = c.lam
    mults = {"dt": lam, "gamma": np.full_like(lam, gamma), "half": np.sqrt(np.abs(lam)), "one": np.ones_like(lam)}
    times = series.times

    def lq_over_time(stack_fn, mult):
        """L_p(time) of the L_q(space) norm of the assembled quantity."""
        if plancherel:
            acc = 0.0
            for m in range(c.nodes):
                acc += c.weights[m] / (2 * np.pi) * abs(mult[m]) ** 2 * norm(stack_fn(m)) ** 2
            return float(np.sqrt(acc))
        vals = np.array([norm(v) for v in _assembled(stack_fn, mult)])
        return _time_norm(vals, times, gamma, p)

    def _assembled(stack_fn, mult):
        arr = np.stack([stack_fn(m) for m in range(c.nodes)])
        K = c.kernel(times) * mult
        return np.tensordot(K, arr, axes=(1, 0))

    terms = {}
    for s in rs.SIDES:
        sfx = "+" if s > 0 else "-"
        U = series.nodes_u[s]
        TH = series.nodes_theta[s]
        terms["dt_U" + sfx] = lq_over_time(lambda m: U[m, 0], mults["dt"])
        terms["gamma_U" + sfx] = lq_over_time(lambda m: U[m, 0], mults["gamma"])
        terms["half_grad_U" + sfx] = lq_over_time(lambda m: rs._tensor_terms(U[m], modes.xi)[0], mults["half"])
        terms["hess_U" + sfx] = lq_over_time(lambda m: rs._tensor_terms(U[m], modes.xi)[1], mults["one"])
        terms["grad_Theta" + sfx] = lq_over_time(lambda m: rs._tensor_terms(TH[m][:, None], modes.xi)[0],
                                                 mults["one"])
    lhs = sum(terms.values())

    data = series.meta["data"]
    phat = data.profile.transform(lam)
    n = grid.n
    xi_abs = np.sqrt(np.sum(modes.xi ** 2, axis=-1))
    rg, rht, rhn = rs.extension_rates(extension, 1.0, series.fp, xi_abs)
    x = grid.x[None, :]
    g = modes.gather(data.spatial.g_hat, 1)[..., None]
    h = modes.gather(data.spatial.h_hat, 1)[..., None]
    eg = np.exp(-rg[:, None] * x)
    gvals = np.stack([g * eg, -rg[:, None] * g * eg, rg[:, None] ** 2 * g * eg])
    rates = np.concatenate([np.repeat(rht[None], n - 1, 0), rhn[None]])[:, :, None]
    eh = np.exp(-rates * x)
    hvals = np.stack([h * eh, -rates * h * eh, rates ** 2 * h * eh])
    G0, Ggrad = gvals[0], rs._tensor_terms(gvals, modes.xi)[0]
    H0, Hhess = hvals[0], rs._tensor_terms(hvals, modes.xi)[1]
    Hr = hvals[1, n - 1] / xi_abs[:, None]
    rhs_terms = {
        "half_G": lq_over_time(lambda m: phat[m] * G0, mults["half"]),
        "grad_G": lq_over_time(lambda m: phat[m] * Ggrad, mults["one"]),
        "dt_H": lq_over_time(lambda m: phat[m] * H0, mults["dt"]),
        "hess_H": lq_over_time(lambda m: phat[m] * Hhess, mults["one"]),
        "dt_riesz_dn_Hn": lq_over_time(lambda m: phat[m] * Hr, mults["dt"]),
    }
    rhs = sum(rhs_terms.values())
    terms.update({"rhs_" + k: v for k, v in rhs_terms.items()})
    ratio = 0.0 if lhs == 0 else (np.inf if rhs == 0 else lhs / rhs)
    return MaxRegReport(lhs, rhs, ratio, terms)
