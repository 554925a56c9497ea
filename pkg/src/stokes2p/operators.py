"""Half-space integral operators ``T[m] f(x) = int_0^inf m(xi', x_n + y_n) f(xi', y_n) dy_n``.

Functions on the upper half-space are stored per active tangential mode at
the nodes of the graded vertical grid.  Quadrature in ``y_n`` is the
trapezoid rule on those nodes.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from . import resolvent as rs
from . import symbols as sy
from .grid import GridSpec

logger = logging.getLogger(__name__)


class GradedQuadratureWarning(UserWarning):
    """The kernel was singular at ``x_n + y_n = 0`` and that node pair was dropped."""


@dataclass
class HalfSpaceFunction:
    """Per-mode values ``(M, Nv + 1)`` on the non-negative vertical nodes."""

    grid: GridSpec
    modes: rs.ModeSet
    values: np.ndarray

    def __add__(self, other):
        return HalfSpaceFunction(self.grid, self.modes, self.values + other.values)

    def __mul__(self, c):
        return HalfSpaceFunction(self.grid, self.modes, c * self.values)

    __rmul__ = __mul__

    def norm(self, q: float = 2) -> float:
        return rs._Norm(self.grid, self.modes, q)(self.values[None])

    def physical(self):
        phys = self.modes.scatter(self.values, self.grid, (), (self.grid.Nv + 1,))
        return np.fft.ifftn(phys, axes=tuple(range(self.grid.n - 1))) * np.prod(self.grid.N)


def jjump_extend(upper, lower, grid: GridSpec | None = None, modes: rs.ModeSet | None = None):
    """``f(x', x_n) - f(x', -x_n)`` on the upper nodes.

    ``upper`` and ``lower`` hold values at ``+x_i`` and ``-x_i`` respectively.
    Returns an array, or a :class:`HalfSpaceFunction` when grid and modes are given.
    """
    out = np.asarray(upper) - np.asarray(lower)
    if grid is None:
        return out
    return HalfSpaceFunction(grid, modes, out)


def kernel_matrix(m, xi, x, y, warn: bool = True):
    """``m(xi, x_i + y_j)`` for every mode, shape ``(M, len(x), len(y))``; singular entries set to 0."""
    z = x[None, :, None] + y[None, None, :]
    z = np.broadcast_to(z, (len(xi), len(x), len(y)))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        K = np.asarray(m(xi, z), complex)
    bad = ~np.isfinite(K)
    if np.any(bad):
        if warn:
            warnings.warn("kernel singular on the grid; dropping those node pairs", GradedQuadratureWarning,
                          stacklevel=3)
        K = np.where(bad, 0.0, K)
    return K


def apply_T(m, f: HalfSpaceFunction) -> HalfSpaceFunction:
    """Graded trapezoid quadrature of ``T[m] f`` per tangential mode."""
    grid = f.grid
    x = grid.x
    K = kernel_matrix(m, f.modes.xi, x, x)
    out = np.einsum("mij,j,mj->mi", K, grid.weights, f.values)
    return HalfSpaceFunction(grid, f.modes, out)


# --------------------------------------------------------------------------
# symbols as closures
# --------------------------------------------------------------------------


def _batched_table(xi, lam, fp):
    M = len(xi)
    return sy.build_symbol_table(sy.SpectralPoint(np.full((M, 1, 1), lam, complex), xi[:, None, None, :]), fp)


def exp_symbol(xi, z):
    """``exp(-A z)``."""
    A = np.sqrt(np.sum(np.asarray(xi, complex) ** 2, axis=-1)).reshape(-1, 1, 1)
    return np.exp(-A * z)


def carleman_symbol(xi, z):
    """``1 / z`` without tangential structure."""
    return 1.0 / z


def steep_symbol(xi, z):
    """``1 / z^2``; violates the ``|m| <~ z^-1`` envelope."""
    return 1.0 / z ** 2


class SymbolClosure:
    """Callable ``m(xi, z)`` built from a symbol table at fixed ``lam``.

    ``evaluate(tbl, z)`` must return values for ``z >= 0`` in the mirrored
    frame; lower-phase symbols are mirrored via ``z -> -z`` by the caller.
    """

    def __init__(self, name, evaluate, lam, fp):
        self.name, self._eval, self.lam, self.fp = name, evaluate, lam, fp
        self._cache = {}

    def table(self, xi):
        key = xi.tobytes()
        if key not in self._cache:
            self._cache = {key: _batched_table(xi, self.lam, self.fp)}
        return self._cache[key]

    def __call__(self, xi, z):
        return self._eval(self.table(np.asarray(xi, complex)), z)


def certified_symbols(lam: complex, fp: sy.FluidParams, n: int) -> dict:
    """Weighted S-family members that satisfy the ``|m| <~ z^-1`` envelope, as closures."""
    al = abs(lam)
    out = {}
    for v in range(1, 7):
        m = 1 if v in (2, 6) else None

        def su(tbl, z, v=v, m=m):
            return al * sy.s_family_value(tbl, "S_u", v, 1, 1, z, j=n, m=m)

        def su2(tbl, z, v=v, m=m):
            return sy.s_family_value(tbl, "S_u", v, 1, 1, z, j=n, m=m, order=2)

        def st(tbl, z, v=v, m=m):
            return sy.s_family_value(tbl, "S_theta", v, 1, 1, z, m=m, order=1)

        out[f"Su_v{v}_lam"] = SymbolClosure(f"Su_v{v}_lam", su, lam, fp)
        out[f"Su_v{v}_dd"] = SymbolClosure(f"Su_v{v}_dd", su2, lam, fp)
        out[f"Stheta_v{v}_d"] = SymbolClosure(f"Stheta_v{v}_d", st, lam, fp)
    return out


# --------------------------------------------------------------------------
# empirical operator norms
# --------------------------------------------------------------------------


def random_ensemble(grid: GridSpec, modes: rs.ModeSet, size: int, seed: int, terms: int = 4) -> list:
    """Band-limited random functions built from grid-independent profiles.

    Each member mixes ``exp(-a y)``, ``y exp(-a y)`` and Gaussian bumps with
    seeded parameters, so refining the grid samples the same functions.
    """
    rng = np.random.default_rng(seed)
    y = grid.x
    out = []
    for _ in range(size):
        vals = np.zeros((modes.size, len(y)), complex)
        for mi in range(modes.size):
            for _ in range(terms):
                c = rng.normal() + 1j * rng.normal()
                kind = rng.integers(3)
                a = np.exp(rng.uniform(np.log(0.3), np.log(5.0)))
                if kind == 0:
                    prof = np.exp(-a * y)
                elif kind == 1:
                    prof = a * y * np.exp(-a * y)
                else:
                    y0 = rng.uniform(0.0, 4.0)
                    prof = np.exp(-((y - y0) * a) ** 2)
                vals[mi] += c * prof
        out.append(HalfSpaceFunction(grid, modes, vals))
    return out


def empirical_bound(m, q: float, ensemble_size: int, seed: int, grid: GridSpec, modes: rs.ModeSet) -> float:
    """``max ||T[m] f||_q / ||f||_q`` over a seeded random ensemble."""
    K = kernel_matrix(m, modes.xi, grid.x, grid.x)
    w = grid.weights
    best = 0.0
    for f in random_ensemble(grid, modes, ensemble_size, seed):
        Tf = HalfSpaceFunction(grid, modes, np.einsum("mij,j,mj->mi", K, w, f.values))
        nf = f.norm(q)
        if nf > 0:
            best = max(best, Tf.norm(q) / nf)
    return float(best)


def empirical_bound_time(m_of_lam, gamma: float, p: float, q: float, ensemble_size: int, seed: int,
                         grid: GridSpec, modes: rs.ModeSet, Nt: int = 64, T: float = 8.0) -> float:
    """Empirical norm of ``exp(gamma t) F^-1 T[m_lam] F exp(-gamma t)`` in weighted ``L_p(L_q)``.

    ``m_of_lam(lam)`` returns a symbol closure; time is periodized on ``[0, T)``.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(Nt) * T / Nt
    tau = np.fft.fftfreq(Nt, T / Nt) * 2 * np.pi
    w = grid.weights
    Ks = [kernel_matrix(m_of_lam(gamma + 1j * tk), modes.xi, grid.x, grid.x) for tk in tau]
    base = random_ensemble(grid, modes, ensemble_size, seed)
    best = 0.0
    for f in base:
        # weighted data exp(-gamma t) g: smooth periodic time envelope times a spatial member
        k = rng.integers(1, 4)
        env = np.sin(np.pi * t / T) ** 2 * np.cos(2 * np.pi * k * t / T + rng.uniform(0, 2 * np.pi))
        G = env[:, None, None] * f.values[None]
        Gh = np.fft.fft(G, axis=0)
        Th = np.stack([np.einsum("mij,j,mj->mi", Ks[i], w, Gh[i]) for i in range(Nt)])
        TG = np.fft.ifft(Th, axis=0)

        def lpq(arr):
            vals = np.array([rs._Norm(grid, modes, q)(a[None]) for a in arr])
            return float((np.sum(vals ** p) * T / Nt) ** (1 / p))

        den = lpq(G)
        if den > 0:
            best = max(best, lpq(TG) / den)
    return float(best)


def refinement_drift(m, q, grid: GridSpec, modes: rs.ModeSet, levels: int = 3, ensemble_size: int = 4,
                     seed: int = 0):
    """Empirical norms on ``levels`` successive 2x vertical refinements and the max relative drift."""
    norms = []
    g = grid
    for _ in range(levels):
        norms.append(empirical_bound(m, q, ensemble_size, seed, g, modes))
        g = g.refine(2)
    norms = np.array(norms)
    drift = float(np.max(np.abs(np.diff(norms)) / np.maximum(norms[1:], 1e-300))) if levels > 1 else 0.0
    return norms, drift


# --------------------------------------------------------------------------
# integral representation of the interface solution
# --------------------------------------------------------------------------


def sol1_velocity(data: rs.InterfaceData, lam: complex, fp: sy.FluidParams, grid: GridSpec | None = None,
                  extension="adaptive"):
    """Velocity of the interface problem through ``T``-operators instead of the trace form.

    The jump data are extended into the upper phase (``G = [[g]] e^{-r y}``);
    since ``G`` vanishes below the interface its jump extension is ``G``
    itself.  For every symbol ``m`` of the trace form the identity
    ``m(x) G(0) = -(T[d_z m] G + T[m] d_y G)(x)`` gives the upper velocity;
    the lower phase uses the mirrored symbol ``z -> m(-z)``.

    Returns ``{+1: (n, M, Nv+1), -1: (n, M, Nv+1)}``.
    """
    grid = data.grid if grid is None else grid
    modes = rs.active_modes(grid, data.support())
    n = grid.n
    tbl = _batched_table(modes.xi, lam, fp)
    J = np.concatenate([modes.gather(data.g_hat, 1), modes.gather(data.h_hat, 1)], axis=0).T
    xi_abs = np.sqrt(np.sum(np.abs(modes.xi) ** 2, axis=-1))
    rg, rht, rhn = rs.extension_rates(extension, lam, fp, xi_abs)
    rates = np.stack([rg] * n + [rht] * (n - 1) + [rhn], axis=-1)
    y = grid.x
    G = J[:, :, None] * np.exp(-rates[:, :, None] * y)
    dG = -rates[:, :, None] * G
    w = grid.weights
    z = y[:, None] + y[None, :]
    out = {}
    for s in (1, -1):
        CM, CE = sy.velocity_coefficients(tbl, s)
        B = tbl.B(s)
        A = tbl.A
        # mirrored kernels as functions of z >= 0
        Mk = [sy.m_kernel(A, B, s * z, s, o) for o in (0, 1)]
        Ek = [sy.exp_kernel(B, s * z, s, o) for o in (0, 1)]
        res = np.zeros((n, modes.size, len(y)), complex)
        for c in range(2 * n):
            for j in range(n):
                m0 = CM[:, 0, 0, j, c, None, None] * Mk[0] + CE[:, 0, 0, j, c, None, None] * Ek[0]
                m1 = s * (CM[:, 0, 0, j, c, None, None] * Mk[1] + CE[:, 0, 0, j, c, None, None] * Ek[1])
                res[j] -= np.einsum("mij,j,mj->mi", m1, w, G[:, c]) + np.einsum("mij,j,mj->mi", m0, w, dG[:, c])
        out[s] = res
    return out, modes
