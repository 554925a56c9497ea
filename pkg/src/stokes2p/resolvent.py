"""Spectral solver for the two-phase resolvent problems with and without surface terms.

Data live on the tangential torus as Fourier coefficients ``c_k`` with
``f(x') = sum_k c_k exp(i xi_k . x')``.  In the vertical direction the
solution is evaluated analytically at the nodes of a graded grid, so the
finite-difference residual in :func:`residual_report` is an independent
check of the formulas.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import symbols as sy
from .grid import GridSpec

logger = logging.getLogger(__name__)

SIDES = (1, -1)


class ZeroModeWarning(UserWarning):
    """Non-zero data in the xi' = 0 mode was discarded."""


# --------------------------------------------------------------------------
# data containers
# --------------------------------------------------------------------------


def to_physical(coef, grid: GridSpec):
    """Tangential coefficients (last ``n-1`` axes) to grid values."""
    axes = tuple(range(-(grid.n - 1), 0))
    return np.fft.ifftn(coef, axes=axes) * np.prod(grid.N)


def to_coefficients(values, grid: GridSpec):
    axes = tuple(range(-(grid.n - 1), 0))
    return np.fft.fftn(values, axes=axes) / np.prod(grid.N)


@dataclass
class InterfaceData:
    """Jumps ``[[g]]``, ``[[h]]`` and kinematic data ``d`` as tangential coefficients.

    ``g_hat`` and ``h_hat`` have shape ``(n,) + grid.N``, ``d_hat`` has shape ``grid.N``.
    """

    grid: GridSpec
    g_hat: np.ndarray
    h_hat: np.ndarray
    d_hat: np.ndarray

    @classmethod
    def zeros(cls, grid: GridSpec) -> "InterfaceData":
        shp = (grid.n,) + grid.N
        return cls(grid, np.zeros(shp, complex), np.zeros(shp, complex), np.zeros(grid.N, complex))

    @classmethod
    def from_modes(cls, grid: GridSpec, modes: dict) -> "InterfaceData":
        """Build from ``{k_tuple: {'g1': c, ..., 'hn': c, 'd': c}}``."""
        out = cls.zeros(grid)
        for k, entries in modes.items():
            idx = grid.index_of(k)
            for name, val in entries.items():
                out.set_entry(name, idx, val)
        return out

    def set_entry(self, name: str, idx: tuple, val) -> None:
        n = self.grid.n
        if name == "d":
            self.d_hat[idx] += val
            return
        fam, comp = name[0], name[1:]
        if fam not in "gh" or not comp.isdigit() or not 1 <= int(comp) <= n:
            raise KeyError(f"unknown interface field {name!r}")
        target = self.g_hat if fam == "g" else self.h_hat
        target[(int(comp) - 1,) + idx] += val

    @classmethod
    def from_physical(cls, grid, g, h, d=None) -> "InterfaceData":
        d = np.zeros(grid.N) if d is None else d
        return cls(grid, to_coefficients(np.asarray(g, complex), grid),
                   to_coefficients(np.asarray(h, complex), grid), to_coefficients(np.asarray(d, complex), grid))

    def physical(self):
        return to_physical(self.g_hat, self.grid), to_physical(self.h_hat, self.grid), to_physical(self.d_hat, self.grid)

    def __add__(self, other):
        return InterfaceData(self.grid, self.g_hat + other.g_hat, self.h_hat + other.h_hat, self.d_hat + other.d_hat)

    def __mul__(self, c):
        return InterfaceData(self.grid, c * self.g_hat, c * self.h_hat, c * self.d_hat)

    __rmul__ = __mul__

    def support(self) -> np.ndarray:
        mag = np.abs(self.g_hat).sum(0) + np.abs(self.h_hat).sum(0) + np.abs(self.d_hat)
        return mag > 0


@dataclass
class ForceData:
    """Body force on the periodized box ``T^{n-1} x [-X, X)``; ``f_hat`` has shape ``(n,) + grid.N + (Nz,)``."""

    grid: GridSpec
    f_hat: np.ndarray

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((grid.n,) + grid.N + (grid.Nz,), complex))

    @classmethod
    def from_modes(cls, grid, modes: dict) -> "ForceData":
        """``{(k_1, ..., k_{n-1}, k_z): [c_1, ..., c_n]}`` with ``k_z`` an integer vertical index."""
        out = cls.zeros(grid)
        for k, vec in modes.items():
            idx = grid.index_of(k[:-1])
            kz = int(k[-1])
            if not -grid.Nz // 2 <= kz < grid.Nz // 2:
                raise IndexError(f"vertical mode {kz} outside Nz = {grid.Nz}")
            out.f_hat[(slice(None),) + idx + (kz % grid.Nz,)] += np.asarray(vec, complex)
        return out

    def support(self) -> np.ndarray:
        return np.abs(self.f_hat).sum(axis=(0, -1)) > 0


@dataclass
class ModeSet:
    """Active tangential modes: FFT indices and frequencies."""

    idx: np.ndarray
    xi: np.ndarray

    @property
    def size(self) -> int:
        return len(self.idx)

    def gather(self, arr, lead: int = 0):
        """Pick active modes from an array with ``lead`` leading axes then the tangential axes."""
        cols = tuple(self.idx[:, d] for d in range(self.idx.shape[1]))
        return arr[(slice(None),) * lead + cols]

    def scatter(self, vals, grid, lead_shape=(), trail_shape=()):
        out = np.zeros(lead_shape + grid.N + trail_shape, complex)
        cols = tuple(self.idx[:, d] for d in range(self.idx.shape[1]))
        out[(slice(None),) * len(lead_shape) + cols] = vals
        return out


def active_modes(grid: GridSpec, *supports) -> ModeSet:
    """Union of the supports with the zero tangential mode removed."""
    mask = np.zeros(grid.N, bool)
    for s in supports:
        if s is not None:
            mask |= s
    zero = (0,) * (grid.n - 1)
    if mask[zero]:
        warnings.warn("discarding data in the zero tangential mode", ZeroModeWarning, stacklevel=3)
        logger.warning("zero tangential mode filtered")
        mask[zero] = False
    idx_all, _, xi_all = grid.mode_table()
    flat = mask[tuple(idx_all.T)]
    return ModeSet(idx_all[flat], xi_all[flat])


@dataclass
class TwoPhaseField:
    """Per-mode solution at the vertical nodes of both phases.

    ``u[s]`` has shape ``(3, n, M, Nv + 1)`` holding ``d^m u_j / dx_n^m`` for
    ``m = 0, 1, 2``; ``theta[s]`` has shape ``(2, M, Nv + 1)``.  Node ``i`` of
    the lower phase sits at ``x_n = -grid.x[i]``.
    """

    grid: GridSpec
    lam: complex
    fp: sy.FluidParams
    modes: ModeSet
    u: dict
    theta: dict
    eta_hat: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __add__(self, other: "TwoPhaseField") -> "TwoPhaseField":
        if not np.array_equal(self.modes.idx, other.modes.idx):
            raise ValueError("fields live on different mode sets")
        eta = self.eta_hat
        if other.eta_hat is not None:
            eta = other.eta_hat if eta is None else eta + other.eta_hat
        return TwoPhaseField(
            self.grid, self.lam, self.fp, self.modes,
            {s: self.u[s] + other.u[s] for s in SIDES},
            {s: self.theta[s] + other.theta[s] for s in SIDES},
            eta, dict(self.meta),
        )

    def trace(self, side):
        """Values at ``x_n = 0+`` or ``0-``: ``(u (n, M), theta (M,))``."""
        s = sy.normalize_side(side)
        return self.u[s][0, :, :, 0], self.theta[s][0, :, 0]

    def physical(self, side, order: int = 0):
        """Velocity and pressure on the full tangential grid, shape ``(n,) + N + (Nv+1,)``."""
        s = sy.normalize_side(side)
        u = self.modes.scatter(self.u[s][order], self.grid, (self.grid.n,), (self.grid.Nv + 1,))
        th = self.modes.scatter(self.theta[s][min(order, 1)], self.grid, (), (self.grid.Nv + 1,))
        axes = tuple(range(1, self.grid.n))
        u = np.fft.ifftn(u, axes=axes) * np.prod(self.grid.N)
        th = np.fft.ifftn(th, axes=tuple(range(0, self.grid.n - 1))) * np.prod(self.grid.N)
        return u, th

    def decay_ok(self) -> bool:
        """Envelope check ``|u(X)| <= exp(-Re min(A, B) X / 2) |u(0)|`` per mode."""
        tbl_A = np.sqrt(np.sum(self.modes.xi ** 2, axis=-1))
        env = np.exp(-tbl_A * self.grid.X / 2)
        for s in SIDES:
            u0 = np.abs(self.u[s][0, :, :, 0]).max(axis=0)
            uX = np.abs(self.u[s][0, :, :, -1]).max(axis=0)
            if np.any(uX > env * u0 + 1e-300):
                return False
        return True


def zero_field(grid, lam, fp, modes) -> TwoPhaseField:
    M = modes.size
    u = {s: np.zeros((3, grid.n, M, grid.Nv + 1), complex) for s in SIDES}
    th = {s: np.zeros((2, M, grid.Nv + 1), complex) for s in SIDES}
    return TwoPhaseField(grid, complex(lam), fp, modes, u, th)


# --------------------------------------------------------------------------
# whole-space part
# --------------------------------------------------------------------------


@dataclass
class HelmholtzPart:
    """Whole-space solution ``(psi, phi)`` of each phase as coefficients on the periodized box."""

    grid: GridSpec
    psi_hat: dict
    phi_hat: np.ndarray

    def evaluate(self, modes: ModeSet, side, x=None, orders=3):
        """``psi`` derivatives ``(orders, n, M, nodes)`` and ``phi`` derivatives ``(2, M, nodes)``."""
        s = sy.normalize_side(side)
        x = s * self.grid.x if x is None else np.asarray(x, float)
        kz = self.grid.kz
        ph = np.exp(1j * np.outer(kz, x))
        ps = modes.gather(self.psi_hat[s], lead=1)
        fi = modes.gather(self.phi_hat)
        psi = np.stack([(ps * (1j * kz) ** m) @ ph for m in range(orders)])
        phi = np.stack([(fi * (1j * kz) ** m) @ ph for m in range(2)])
        return psi, phi


def helmholtz_solve(force: ForceData, lam, fp: sy.FluidParams, grid: GridSpec | None = None) -> HelmholtzPart:
    """Whole-space velocity ``psi`` and pressure ``phi`` with ``rho lam psi - mu Lap psi + grad phi = f``."""
    grid = force.grid if grid is None else grid
    n = grid.n
    _, _, xi_t = grid.mode_table()
    xi_t = xi_t.reshape(grid.N + (n - 1,))
    kz = grid.kz
    xi_full = np.concatenate(
        [np.broadcast_to(xi_t[..., None, :], grid.N + (grid.Nz, n - 1)),
         np.broadcast_to(kz.reshape((1,) * (n - 1) + (-1, 1)), grid.N + (grid.Nz, 1))], axis=-1)
    r2 = np.sum(xi_full ** 2, axis=-1)
    zero = r2 == 0
    f = np.moveaxis(force.f_hat, 0, -1)
    if np.any(np.abs(f[zero]) > 0):
        warnings.warn("discarding the zero full-space mode of f", ZeroModeWarning, stacklevel=2)
    safe = np.where(zero[..., None], 1.0, xi_full)
    psi = {}
    for s in SIDES:
        V, Pv = sy.helmholtz_symbol(safe, lam, fp, s)
        p = np.einsum("...jk,...k->...j", V, f)
        p[zero] = 0
        psi[s] = np.moveaxis(p, -1, 0)
    phi = np.einsum("...k,...k->...", Pv, f)
    phi[zero] = 0
    return HelmholtzPart(grid, psi, phi)


# --------------------------------------------------------------------------
# boundary part
# --------------------------------------------------------------------------


def _table(modes: ModeSet, lam, fp) -> sy.SymbolTable:
    return sy.build_symbol_table(sy.SpectralPoint(np.full(modes.size, lam, complex), modes.xi), fp)


def _boundary_fields(tbl: sy.SymbolTable, J: np.ndarray, grid: GridSpec):
    """Evaluate velocity and pressure for jump vector ``J`` of shape ``(M, 2n)``."""
    x = grid.x[None, :]
    A = tbl.A[:, None]
    u, th = {}, {}
    for s in SIDES:
        CM, CE = sy.velocity_coefficients(tbl, s)
        cm = np.einsum("mjc,mc->jm", CM, J)[..., None]
        ce = np.einsum("mjc,mc->jm", CE, J)[..., None]
        B = tbl.B(s)[:, None]
        xs = s * x
        u[s] = np.stack([cm * sy.m_kernel(A, B, xs, s, o) + ce * sy.exp_kernel(B, xs, s, o) for o in range(3)])
        cp = np.einsum("mc,mc->m", sy.pressure_coefficients(tbl, s), J)[:, None]
        th[s] = np.stack([cp * sy.exp_kernel(A, xs, s, o) for o in range(2)])
    return u, th


def boundary_solve(data: InterfaceData, lam, fp: sy.FluidParams, grid: GridSpec | None = None,
                   modes: ModeSet | None = None) -> TwoPhaseField:
    """Solve the interface problem with zero body force from the jumps in ``data``."""
    grid = data.grid if grid is None else grid
    modes = active_modes(grid, data.support()) if modes is None else modes
    if modes.size == 0:
        return zero_field(grid, lam, fp, modes)
    J = np.concatenate([modes.gather(data.g_hat, 1), modes.gather(data.h_hat, 1)], axis=0).T
    tbl = _table(modes, lam, fp)
    u, th = _boundary_fields(tbl, J, grid)
    return TwoPhaseField(grid, complex(lam), fp, modes, u, th, meta={"table": tbl})


def stress_normal(u, theta, xi, mu):
    """``S(u, theta) nu`` at one node set for ``nu = -e_n``; ``u`` is ``(orders, n, M, ...)``."""
    n = u.shape[1]
    out = np.empty(u.shape[1:], complex)
    for j in range(n - 1):
        out[j] = -mu * (1j * _bc(xi[:, j], u[0, n - 1]) * u[0, n - 1] + u[1, j])
    out[n - 1] = -(2 * mu * u[1, n - 1] - theta[0])
    return out


def _bc(v, like):
    return v.reshape(v.shape + (1,) * (like.ndim - 1))


def _tilde_jumps(data, hp: HelmholtzPart, modes, fp):
    g = modes.gather(data.g_hat, 1)
    h = modes.gather(data.h_hat, 1)
    for s in SIDES:
        psi, phi = hp.evaluate(modes, s, x=np.zeros(1), orders=2)
        Sn = stress_normal(psi, phi, modes.xi, fp.mu(s))[..., 0]
        g = g - s * Sn
        h = h - s * psi[0, :, :, 0]
    return g, h


def solve_rswithout(force: ForceData | None, data: InterfaceData, lam, fp: sy.FluidParams,
                    grid: GridSpec | None = None) -> TwoPhaseField:
    """Resolvent problem without surface terms: ``u = psi + w``, ``theta = phi + kappa``."""
    grid = data.grid if grid is None else grid
    if force is None or not np.any(force.f_hat):
        fld = boundary_solve(data, lam, fp, grid)
        fld.meta["force"] = None
        return fld
    modes = active_modes(grid, data.support(), force.support())
    hp = helmholtz_solve(force, lam, fp, grid)
    gt, ht = _tilde_jumps(data, hp, modes, fp)
    tilde = InterfaceData(grid, modes.scatter(gt, grid, (grid.n,)), modes.scatter(ht, grid, (grid.n,)),
                          np.zeros(grid.N, complex))
    w = boundary_solve(tilde, lam, fp, grid, modes)
    for s in SIDES:
        psi, phi = hp.evaluate(modes, s)
        w.u[s] = w.u[s] + psi
        w.theta[s] = w.theta[s] + phi
    w.meta.update(force=force, helmholtz=hp)
    return w


def surface_solve(d_tilde: np.ndarray, tbl: sy.SymbolTable, grid: GridSpec, *, floor: float = sy.DET_FLOOR):
    """Height ``eta_hat`` and the correction ``(w, kappa)`` driven by it.

    Parameters
    ----------
    d_tilde : ndarray, shape (M,)
        Kinematic data per active mode after removing the normal trace of ``v``.
    tbl : SymbolTable
        Symbols at the active modes.

    Returns
    -------
    eta_hat, u, theta
    """
    Lop = tbl.lopatinskii
    if np.any(~(np.abs(Lop) > floor)):
        raise sy.LopatinskiiDegeneracyError("surface symbol below floor")
    eta = tbl.detL_closed * d_tilde / Lop
    n = tbl.n
    J = np.zeros((len(d_tilde), 2 * n), complex)
    J[:, n - 1] = -tbl.fp.surface_factor(tbl.A) * eta
    u, th = _boundary_fields(tbl, J, grid)
    return eta, u, th


def solve_rswith(force: ForceData | None, data: InterfaceData, lam, fp: sy.FluidParams,
                 grid: GridSpec | None = None) -> TwoPhaseField:
    """Resolvent problem with surface tension and gravity; kinematic condition on the upper trace."""
    grid = data.grid if grid is None else grid
    modes = active_modes(grid, data.support(), None if force is None else force.support())
    if modes.size == 0:
        fld = zero_field(grid, lam, fp, modes)
        fld.eta_hat = np.zeros(0, complex)
        return fld
    v = solve_rswithout(force, data, lam, fp, grid)
    if not np.array_equal(v.modes.idx, modes.idx):
        v = _align(v, modes)
    tbl = _table(modes, lam, fp)
    d_tilde = modes.gather(data.d_hat) - v.u[1][0, grid.n - 1, :, 0]
    eta, wu, wt = surface_solve(d_tilde, tbl, grid)
    for s in SIDES:
        v.u[s] = v.u[s] + wu[s]
        v.theta[s] = v.theta[s] + wt[s]
    v.eta_hat = eta
    v.meta.update(d_tilde=d_tilde, table=tbl)
    return v


def _align(fld: TwoPhaseField, modes: ModeSet) -> TwoPhaseField:
    """Re-index a field onto a superset of its modes (missing modes are zero)."""
    out = zero_field(fld.grid, fld.lam, fld.fp, modes)
    pos = {tuple(r): i for i, r in enumerate(modes.idx)}
    sel = [pos[tuple(r)] for r in fld.modes.idx]
    for s in SIDES:
        out.u[s][:, :, sel] = fld.u[s]
        out.theta[s][:, sel] = fld.theta[s]
    out.meta = dict(fld.meta)
    return out


# --------------------------------------------------------------------------
# residuals
# --------------------------------------------------------------------------


@dataclass
class ResidualReport:
    """Relative residual per equation; ``spectral`` uses analytic derivatives, ``fd`` finite differences."""

    spectral: dict
    fd: dict

    def worst_spectral(self) -> float:
        return max(self.spectral.values()) if self.spectral else 0.0


def _rel(res, *terms):
    scale = max(float(np.max(np.abs(t))) if np.size(t) else 0.0 for t in terms)
    r = float(np.max(np.abs(res))) if np.size(res) else 0.0
    return r / scale if scale > 0 else r


def _force_at(fld: TwoPhaseField, s):
    force = fld.meta.get("force")
    if force is None:
        return None
    ph = np.exp(1j * np.outer(fld.grid.kz, s * fld.grid.x))
    return np.stack([fld.modes.gather(force.f_hat[j]) @ ph for j in range(fld.grid.n)])


def residual_report(fld: TwoPhaseField, data: InterfaceData, *, fd: bool = True) -> ResidualReport:
    """Residuals of momentum, divergence, interface and kinematic rows.

    The finite-difference branch uses only the nodal values of ``u`` and
    ``theta`` and the analytic grid map, then returns the maximum modulus of
    the momentum residual in physical space.
    """
    grid, lam, fp, modes = fld.grid, fld.lam, fld.fp, fld.modes
    n = grid.n
    xi = modes.xi
    A2 = np.sum(xi ** 2, axis=-1)[:, None]
    spec, fdr = {}, {}
    if modes.size == 0:
        return ResidualReport({"momentum": 0.0, "divergence": 0.0, "stress_jump": 0.0, "velocity_jump": 0.0},
                              {"momentum": 0.0} if fd else {})
    for s in SIDES:
        rho, mu = fp.rho(s), fp.mu(s)
        u, th = fld.u[s], fld.theta[s]
        f = _force_at(fld, s)
        res, terms = [], []
        for j in range(n):
            grad = 1j * xi[:, j, None] * th[0] if j < n - 1 else th[1]
            r = (rho * lam + mu * A2) * u[0, j] - mu * u[2, j] + grad
            if f is not None:
                r = r - f[j]
            res.append(r)
            terms += [rho * lam * u[0, j], mu * A2 * u[0, j], mu * u[2, j], grad]
        spec[f"momentum{'+' if s > 0 else '-'}"] = _rel(np.stack(res), *terms)
        div = np.einsum("mj,jmi->mi", 1j * xi, u[0, : n - 1]) + u[1, n - 1]
        spec[f"divergence{'+' if s > 0 else '-'}"] = _rel(div, u[1, n - 1], np.sqrt(A2) * u[0])
        if fd:
            fdr[f"momentum{'+' if s > 0 else '-'}"] = _fd_momentum(fld, s, f)
    up, tp = fld.u[1][..., 0], fld.theta[1][:, :, 0]
    um, tm = fld.u[-1][..., 0], fld.theta[-1][:, :, 0]
    g = modes.gather(data.g_hat, 1)
    h = modes.gather(data.h_hat, 1)
    jump_S = stress_normal(up, tp, xi, fp.mu_plus) - stress_normal(um, tm, xi, fp.mu_minus)
    if fld.eta_hat is not None:
        jump_S[n - 1] = jump_S[n - 1] + fp.surface_factor(np.sqrt(A2[:, 0])) * fld.eta_hat
        kin = lam * fld.eta_hat + up[0, n - 1] - modes.gather(data.d_hat)
        spec["kinematic"] = _rel(kin, lam * fld.eta_hat, up[0, n - 1], modes.gather(data.d_hat))
    spec["stress_jump"] = _rel(jump_S - g, g, stress_normal(up, tp, xi, fp.mu_plus))
    spec["velocity_jump"] = _rel(up[0] - um[0] - h, h, up[0], um[0])
    return ResidualReport(spec, fdr)


def _fd_momentum(fld: TwoPhaseField, s: int, f) -> float:
    """Momentum residual with vertical derivatives by central differences in the grid coordinate."""
    grid, lam, fp, xi = fld.grid, fld.lam, fld.fp, fld.modes.xi
    n = grid.n
    rho, mu = fp.rho(s), fp.mu(s)
    h = 1.0 / grid.Nv
    xp = s * grid.dx_dzeta[1:-1]
    xpp = s * grid.d2x_dzeta2[1:-1]
    u = fld.u[s][0]
    th = fld.theta[s][0]

    def d1(v):
        return (v[..., 2:] - v[..., :-2]) / (2 * h) / xp

    def d2(v):
        vz = (v[..., 2:] - v[..., :-2]) / (2 * h)
        vzz = (v[..., 2:] - 2 * v[..., 1:-1] + v[..., :-2]) / h ** 2
        return (vzz - xpp * vz / xp) / xp ** 2

    A2 = np.sum(xi ** 2, axis=-1)[:, None]
    res = np.empty((n,) + u.shape[1:-1] + (grid.Nv - 1,), complex)
    scale = 0.0
    for j in range(n):
        uj = u[j]
        grad = 1j * xi[:, j, None] * th[:, 1:-1] if j < n - 1 else d1(th)
        r = (rho * lam + mu * A2) * uj[:, 1:-1] - mu * d2(uj) + grad
        if f is not None:
            r = r - f[j][:, 1:-1]
        res[j] = r
        scale = max(scale, float(np.abs(rho * lam * uj).max()))
    phys = fld.modes.scatter(res, grid, (n,), (grid.Nv - 1,))
    phys = np.fft.ifftn(phys, axes=tuple(range(1, n))) * np.prod(grid.N)
    return float(np.abs(phys).max()) / max(scale, 1e-300)


def fd_convergence_order(solve, levels=(16, 32, 64), side=1):
    """Observed order of the finite-difference momentum residual under vertical refinement.

    ``solve(Nv)`` must return ``(field, data)``.  Returns ``(orders, residuals)``.
    """
    res = []
    for Nv in levels:
        fld, data = solve(Nv)
        rep = residual_report(fld, data)
        res.append(max(rep.fd.values()))
    res = np.array(res)
    ratios = np.array(levels[1:]) / np.array(levels[:-1])
    return np.log(res[:-1] / res[1:]) / np.log(ratios), res


# --------------------------------------------------------------------------
# norms and the resolvent ratio
# --------------------------------------------------------------------------


def extension_rates(policy, lam, fp: sy.FluidParams, xi_abs):
    """Decay rates used to extend interface data into the upper phase.

    Returns rates ``(r_g, r_h_tangential, r_h_normal)`` per mode.  ``'adaptive'``
    follows the Stokes boundary layer for ``g`` and ``h'`` and the tangential
    scale for ``h_n``; ``'tangential'`` uses ``|xi'|`` throughout; a number
    fixes a constant rate.
    """
    xi_abs = np.asarray(xi_abs, float)
    if policy == "adaptive":
        r = np.sqrt(abs(lam) * fp.rho_plus / fp.mu_plus + xi_abs ** 2)
        return r, r, xi_abs
    if policy == "tangential":
        return xi_abs, xi_abs, xi_abs
    c = float(policy)
    if not c > 0:
        raise ValueError("extension rate must be positive")
    r = np.full_like(xi_abs, c)
    return r, r, r


@dataclass
class RatioReport:
    lhs: float
    rhs: float
    ratio: float
    terms: dict
    eta_ratio: float | None = None
    inconsistent: bool = False


class _Norm:
    """``L_q`` norm over torus x nodes; Parseval for ``q = 2``, physical sampling otherwise."""

    def __init__(self, grid: GridSpec, modes: ModeSet, q: float, weights=None):
        self.grid, self.modes, self.q = grid, modes, float(q)
        self.w = grid.weights if weights is None else weights

    def __call__(self, comps) -> float:
        comps = np.asarray(comps)
        if comps.size == 0:
            return 0.0
        vol = self.grid.volume
        if self.q == 2:
            mag2 = np.abs(comps) ** 2
            return float(np.sqrt(vol * np.sum(mag2 * self.w)))
        lead = comps.shape[:-2]
        comps = comps.reshape((-1,) + comps.shape[-2:])
        phys = self.modes.scatter(comps, self.grid, (comps.shape[0],), (comps.shape[-1],))
        phys = np.fft.ifftn(phys, axes=tuple(range(1, self.grid.n))) * np.prod(self.grid.N)
        mag = np.sqrt(np.sum(np.abs(phys) ** 2, axis=0))
        cell = vol / np.prod(self.grid.N)
        return float((cell * np.sum(mag ** self.q * self.w)) ** (1 / self.q))


def _tensor_terms(vals, xi):
    """Gradient and Hessian component stacks from ``vals`` of shape ``(3, c, M, nodes)``."""
    ixi = 1j * xi.T[:, None, :, None]
    v0, v1, v2 = vals[0], vals[1], vals[2] if vals.shape[0] > 2 else None
    grad = np.concatenate([ixi * v0[None], v1[None]])
    hess = None
    if v2 is not None:
        tt = (ixi[:, None] * ixi[None, :] * v0[None, None]).reshape((-1,) + v0.shape)
        tn = ixi * v1[None]
        hess = np.concatenate([tt, tn, tn, v2[None]])
    return grad, hess


def norms_and_ratio(fld: TwoPhaseField, data: InterfaceData, q: float = 2, *,
                    extension="adaptive") -> RatioReport:
    """LHS/RHS of the resolvent estimate for a solved field.

    LHS sums ``|lam| u``, ``|lam|^(1/2) grad u``, ``grad^2 u`` and ``grad theta``
    over both phases.  RHS sums ``f``, ``|lam|^(1/2) g``, ``grad g``, ``|lam| h``,
    ``grad^2 h`` and ``|lam| |grad'|^-1 d_n h_n`` with ``g`` and ``h`` extended
    from their jumps into the upper phase by ``extension_rates``.  When the
    field carries a height function, ``eta_ratio`` compares the height norms
    with the RHS plus ``|lam| ||d||_{W^1} + ||d||_{W^2}``.
    """
    grid, lam, fp, modes = fld.grid, fld.lam, fld.fp, fld.modes
    n = grid.n
    al = abs(lam)
    norm = _Norm(grid, modes, q)
    if modes.size == 0:
        return RatioReport(0.0, 0.0, 0.0, {})
    terms = {}
    lhs = 0.0
    for s in SIDES:
        u, th = fld.u[s], fld.theta[s]
        grad, hess = _tensor_terms(u, modes.xi)
        tgrad, _ = _tensor_terms(th[:, None], modes.xi)
        sfx = "+" if s > 0 else "-"
        terms["lam_u" + sfx] = al * norm(u[0])
        terms["lam_half_grad_u" + sfx] = np.sqrt(al) * norm(grad)
        terms["hess_u" + sfx] = norm(hess)
        terms["grad_theta" + sfx] = norm(tgrad)
    lhs = sum(terms.values())

    xi_abs = np.sqrt(np.sum(np.abs(modes.xi) ** 2, axis=-1))
    rg, rht, rhn = extension_rates(extension, lam, fp, xi_abs)
    x = grid.x[None, :]
    g = modes.gather(data.g_hat, 1)[..., None]
    h = modes.gather(data.h_hat, 1)[..., None]
    eg = np.exp(-rg[:, None] * x)
    gvals = np.stack([g * eg, -rg[:, None] * g * eg])
    rates = np.concatenate([np.repeat(rht[None], n - 1, 0), rhn[None]])[:, :, None]
    eh = np.exp(-rates * x)
    hvals = np.stack([h * eh, -rates * h * eh, rates ** 2 * h * eh])
    ggrad, _ = _tensor_terms(np.concatenate([gvals, np.zeros_like(gvals[:1])]), modes.xi)
    _, hhess = _tensor_terms(hvals, modes.xi)
    rhs_terms = {
        "lam_half_g": np.sqrt(al) * norm(gvals[0]),
        "grad_g": norm(ggrad),
        "lam_h": al * norm(hvals[0]),
        "hess_h": norm(hhess),
        "lam_riesz_dn_hn": al * norm(hvals[1, n - 1] / xi_abs[:, None]),
    }
    force = fld.meta.get("force")
    if force is not None:
        fn = 0.0
        for s in SIDES:
            fn += norm(_force_at(fld, s)) ** 2 if q == 2 else norm(_force_at(fld, s))
        rhs_terms["f"] = np.sqrt(fn) if q == 2 else fn
    rhs = sum(rhs_terms.values())
    terms.update({"rhs_" + k: v for k, v in rhs_terms.items()})
    inconsistent = rhs == 0 and lhs > 0
    ratio = 0.0 if lhs == 0 else (np.inf if rhs == 0 else lhs / rhs)
    eta_ratio = None
    if fld.eta_hat is not None:
        ynorm = _Norm(grid, modes, q, weights=np.ones(1))
        eta = fld.eta_hat[None, :, None]
        d = modes.gather(data.d_hat)[None, :, None]

        def sob(v, k):
            # W^k_q norm as the sum of the norms of all tangential derivatives up to order k
            tot, cur = 0.0, v
            for _ in range(k + 1):
                tot += ynorm(cur)
                cur = (1j * modes.xi.T[:, None, :, None] * cur[None]).reshape((-1,) + v.shape[1:])
            return tot

        eta_terms = {
            "lam_eta_W2": al * sob(eta, 2),
            "eta_W3": sob(eta, 3),
            "lam32_eta_W1": al ** 1.5 * sob(eta, 1),
            "lam2_eta": al ** 2 * sob(eta, 0),
        }
        d_terms = {"lam_d_W1": al * sob(d, 1), "d_W2": sob(d, 2)}
        terms.update(eta_terms)
        terms.update({"rhs_" + k: v for k, v in d_terms.items()})
        den = rhs + sum(d_terms.values())
        eta_ratio = sum(eta_terms.values()) / den if den > 0 else 0.0
    return RatioReport(lhs, rhs, ratio, terms, eta_ratio, inconsistent)
