"""Closed-form Fourier symbols of the two-phase Stokes resolvent problem.

Everything here is a pure function of the resolvent parameter ``lam``, the
tangential frequencies ``xi`` (possibly complex) and the fluid constants.
All routines broadcast over leading batch dimensions: ``lam`` has shape
``batch`` and ``xi`` has shape ``batch + (n - 1,)``.

Index conventions follow the usual mathematical ones and are 1-based in
the public symbol API: ``k`` and ``j`` run over ``1..n`` with ``j = n`` the
normal component, and the coefficient matrix ``a`` has columns ``1..n`` for
the stress jump ``[[g]]`` and ``n+1..2n`` for the velocity jump ``[[h]]``.

The interface system is stored with its fourth row written as
``beta_{-n} - beta_{+n} = -[[h_n]]``.  With that orientation the determinant
of ``L`` coincides with the closed polynomial in ``detl_closed_form``; the
solution coefficients ``a = L^{-1} R`` do not depend on the row scaling.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

DET_FLOOR = 1e-300
PHI1_SERIES_RADIUS = 1e-3

SYMBOL_KINDS = (
    "phi_vel",
    "psi_vel",
    "chi_press",
    "omega_press",
    "M_kernel",
    "exp_A",
    "exp_B",
    "S_u_family",
    "S_theta_family",
    "appendixA",
    "helmholtz",
    "lopatinskii_eta",
)


class BranchCutError(ValueError):
    """Square root requested on the closed negative real axis."""


class ZeroFrequencyError(ValueError):
    """A symbol that divides by the tangential root was evaluated at xi' = 0."""


class LopatinskiiDegeneracyError(ArithmeticError):
    """det L (or the surface symbol) fell below the degeneracy floor."""


class ExcludedSymbolError(ValueError):
    """Requested symbol is excluded from its family (omega_n in S^theta variant 5)."""


class SideError(ValueError):
    """Vertical coordinate has the wrong sign for the requested phase."""


def normalize_side(side) -> int:
    """Map ``'+'``, ``'plus'``, ``1`` to ``+1`` and ``'-'``, ``'minus'``, ``-1`` to ``-1``."""
    if side in (1, "+", "plus", "upper"):
        return 1
    if side in (-1, "-", "minus", "lower"):
        return -1
    raise ValueError(f"unknown side {side!r}")


@dataclass(frozen=True)
class FluidParams:
    """Densities, viscosities, surface tension and gravity of the two phases.

    The ``plus`` phase occupies ``x_n > 0``.
    """

    rho_plus: float = 1.0
    rho_minus: float = 1.0
    mu_plus: float = 1.0
    mu_minus: float = 1.0
    c_sigma: float = 0.0
    c_g: float = 0.0

    def __post_init__(self):
        for name in ("rho_plus", "rho_minus", "mu_plus", "mu_minus"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        for name in ("c_sigma", "c_g"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be non-negative, got {v}")

    @property
    def jump_rho(self) -> float:
        return self.rho_plus - self.rho_minus

    def rho(self, side) -> float:
        return self.rho_plus if normalize_side(side) > 0 else self.rho_minus

    def mu(self, side) -> float:
        return self.mu_plus if normalize_side(side) > 0 else self.mu_minus

    def surface_factor(self, A):
        """``[[rho]] c_g - c_sigma A^2``, the Fourier image of ``[[rho]] c_g + c_sigma Laplace'``."""
        return self.jump_rho * self.c_g - self.c_sigma * A * A


def in_sector(lam, epsilon: float, gamma: float = 0.0):
    """Membership in ``{lam != 0 : |arg lam| < pi - epsilon, |lam| >= gamma}``."""
    lam = np.asarray(lam, dtype=complex)
    return (lam != 0) & (np.abs(np.angle(lam)) < np.pi - epsilon) & (np.abs(lam) >= gamma)


def in_double_sector(z, eta: float):
    """Membership in the two-lobed frequency sector of half-angle ``eta``."""
    z = np.asarray(z, dtype=complex)
    ang = np.abs(np.angle(z))
    return (z != 0) & ((ang < eta) | (ang > np.pi - eta))


@dataclass(frozen=True)
class SpectralPoint:
    """Resolvent parameter plus tangential frequencies.

    ``lam`` may be a scalar or an array of batch shape; ``xi`` then has shape
    ``batch + (n - 1,)``.
    """

    lam: complex | np.ndarray
    xi: tuple | np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex)
        if xi.ndim == 0:
            xi = xi[None]
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=complex))
        if xi.shape[-1] < 1:
            raise ValueError("need at least one tangential frequency (n >= 2)")

    @property
    def dim(self) -> int:
        return self.xi.shape[-1] + 1

    @property
    def batch_shape(self) -> tuple:
        return np.broadcast_shapes(self.lam.shape, self.xi.shape[:-1])

    def validate(self, epsilon: float, eta: float, gamma: float = 0.0) -> None:
        if not np.all(in_sector(self.lam, epsilon, gamma)):
            raise ValueError("lambda outside the resolvent sector")
        if not np.all(in_double_sector(self.xi, eta)):
            raise ValueError("tangential frequency outside the double sector")

    def __getitem__(self, idx) -> "SpectralPoint":
        lam = np.broadcast_to(self.lam, self.batch_shape)
        xi = np.broadcast_to(self.xi, self.batch_shape + (self.dim - 1,))
        return SpectralPoint(lam[idx], xi[idx])


def sqrt_positive_real(z):
    """Square root with positive real part.

    Raises
    ------
    BranchCutError
        If any entry lies on the closed negative real axis.
    """
    z = np.asarray(z, dtype=complex)
    bad = (z.imag == 0) & (z.real <= 0)
    if np.any(bad):
        raise BranchCutError("square root requested on the closed negative real axis")
    return np.sqrt(z)


class Roots(NamedTuple):
    A: np.ndarray
    B_plus: np.ndarray
    B_minus: np.ndarray
    A_tilde: np.ndarray


def compute_roots(point: SpectralPoint, fp: FluidParams) -> Roots:
    """Characteristic roots ``A``, ``B_+``, ``B_-`` and the modulus ``A_tilde``."""
    xi = point.xi
    A2 = np.sum(xi * xi, axis=-1)
    # cannot hit the cut for xi in the double sector with eta < pi/4
    A = sqrt_positive_real(A2)
    lam = point.lam
    Bp = sqrt_positive_real(fp.rho_plus / fp.mu_plus * lam + A2)
    Bm = sqrt_positive_real(fp.rho_minus / fp.mu_minus * lam + A2)
    At = np.sqrt(np.sum(np.abs(xi) ** 2, axis=-1))
    return Roots(*np.broadcast_arrays(A, Bp, Bm, At))


def phi1(z):
    """``(exp(z) - 1) / z`` without cancellation near ``z = 0``."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < PHI1_SERIES_RADIUS
    safe = np.where(small, 1.0, z)
    series = 1 + z / 2 * (1 + z / 3 * (1 + z / 4 * (1 + z / 5)))
    return np.where(small, series, (np.exp(safe) - 1.0) / safe)


def _check_side(x, side):
    x = np.asarray(x, dtype=float)
    if side > 0 and np.any(x < 0):
        raise SideError("upper-phase symbol needs x_n >= 0")
    if side < 0 and np.any(x > 0):
        raise SideError("lower-phase symbol needs x_n <= 0")
    return x


def exp_kernel(K, x_n, side, order: int = 0):
    """``d^m/dx^m exp(-+K x)`` for the upper (``-``) or lower (``+``) phase."""
    s = normalize_side(side)
    x = _check_side(x_n, s)
    return (-s * K) ** order * np.exp(-s * K * x)


def m_kernel(A, B, x_n, side, order: int = 0):
    """The difference kernel ``(exp(-+Bx) - exp(-+Ax)) / (B - A)`` and its x-derivatives.

    Near ``B = A`` the value is formed as ``-+x exp(-+Ax) phi1(-+(B - A)x)``,
    which avoids the cancellation in the difference quotient.  Derivatives of order 1 to 3 use the exact
    recurrences in terms of the kernel itself and ``exp(-+Bx)``.
    """
    s = normalize_side(side)
    x = _check_side(x_n, s)
    if order not in (0, 1, 2, 3):
        raise ValueError("derivative order must be 0..3")
    z = -s * (B - A) * x
    small = np.abs(z) < PHI1_SERIES_RADIUS
    diff = np.where(small, 1.0, B - A)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        direct = (np.exp(-s * B * x) - np.exp(-s * A * x)) / diff
    M = np.where(small, -s * x * np.exp(-s * A * x) * phi1(np.where(small, z, 0.0)), direct)
    if order == 0:
        return M
    eB = np.exp(-s * B * x)
    if order == 1:
        return -s * eB - s * A * M
    if order == 2:
        return (A + B) * eB + A * A * M
    return -s * (A * A + A * B + B * B) * eB - s * A ** 3 * M


def detl_closed_form(A, Bp, Bm, mu_p, mu_m):
    """Closed polynomial for det L in the roots and viscosities."""
    S = mu_p * Bp + mu_m * Bm
    return (
        (mu_p - mu_m) ** 2 * A ** 3
        - ((3 * mu_p - mu_m) * mu_p * Bp + (3 * mu_m - mu_p) * mu_m * Bm) * A ** 2
        - (S ** 2 + mu_p * mu_m * (Bp + Bm) ** 2) * A
        - S * (mu_p * Bp ** 2 + mu_m * Bm ** 2)
    )


def interface_matrix(A, Bp, Bm, mu_p, mu_m):
    """The 4x4 interface matrix acting on ``((B+ - A)alpha+n, beta+n, (B- - A)alpha-n, beta-n)``."""
    A, Bp, Bm = np.broadcast_arrays(A, Bp, Bm)
    L = np.zeros(A.shape + (4, 4), dtype=complex)
    L[..., 0, 0] = mu_p * (Bp + A)
    L[..., 0, 1] = mu_p * (Bp ** 2 + A ** 2)
    L[..., 0, 2] = -mu_m * (Bm + A)
    L[..., 0, 3] = -mu_m * (Bm ** 2 + A ** 2)
    L[..., 1, 0] = mu_p * (Bp - A)
    L[..., 1, 1] = -2 * mu_p * A * Bp
    L[..., 1, 2] = mu_m * (Bm - A)
    L[..., 1, 3] = -2 * mu_m * A * Bm
    L[..., 2, 0] = 1
    L[..., 2, 1] = Bp
    L[..., 2, 2] = 1
    L[..., 2, 3] = Bm
    L[..., 3, 1] = -1
    L[..., 3, 3] = 1
    return L


def data_matrix(xi, A):
    """The 4 x 2n matrix mapping ``([[g]], [[h]])`` to the right-hand side of the interface system."""
    xi = np.asarray(xi, dtype=complex)
    n = xi.shape[-1] + 1
    batch = np.broadcast_shapes(xi.shape[:-1], np.shape(A))
    R = np.zeros(batch + (4, 2 * n), dtype=complex)
    R[..., 0, : n - 1] = 1j * xi
    R[..., 1, n - 1] = -A
    R[..., 2, n : 2 * n - 1] = 1j * xi
    R[..., 3, 2 * n - 1] = -1
    return R


def _det3(m):
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


def cofactor_matrix(L):
    """Cofactors of a batch of 4x4 matrices from explicit 3x3 minors."""
    C = np.empty_like(L)
    idx = np.arange(4)
    for i in range(4):
        rows = idx[idx != i]
        for j in range(4):
            cols = idx[idx != j]
            C[..., i, j] = (-1) ** (i + j) * _det3(L[..., rows[:, None], cols[None, :]])
    return C


# degree of L[i, s] in (A, B) is ROW_DEG[i] + COL_DEG[s]; cofactor degrees follow
ROW_DEG = np.array([1, 1, 0, -1])
COL_DEG = np.array([0, 1, 0, 1])


def adjugate_growth_exponents() -> np.ndarray:
    """Exponent ``p(i, s)`` with ``|adj(L)_{is}| <~ (|lam|^(1/2) + A_tilde)^p``."""
    return 3 - ROW_DEG[None, :] - COL_DEG[:, None]


@dataclass
class SymbolTable:
    """All derived symbol values at a (batch of) spectral point(s)."""

    point: SpectralPoint
    fp: FluidParams
    A: np.ndarray
    B_plus: np.ndarray
    B_minus: np.ndarray
    A_tilde: np.ndarray
    L: np.ndarray
    R: np.ndarray
    detL_closed: np.ndarray
    cofactor: np.ndarray
    a: np.ndarray
    lopatinskii: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.point.dim

    @property
    def lam(self):
        return self.point.lam

    @property
    def xi(self):
        return self.point.xi

    @property
    def adjugate(self):
        return np.swapaxes(self.cofactor, -1, -2)

    @property
    def detL_direct(self):
        return np.linalg.det(self.L)

    @property
    def S(self):
        """``mu_+ B_+ + mu_- B_-``."""
        return self.fp.mu_plus * self.B_plus + self.fp.mu_minus * self.B_minus

    @property
    def scale(self):
        """``|lam|^(1/2) + A_tilde``."""
        return np.sqrt(np.abs(self.lam)) + self.A_tilde

    def B(self, side):
        return self.B_plus if normalize_side(side) > 0 else self.B_minus

    @property
    def trace_sum(self):
        """``A {mu_+(B_+ + A) + mu_-(B_- + A)}``."""
        fp = self.fp
        return self.A * (fp.mu_plus * (self.B_plus + self.A) + fp.mu_minus * (self.B_minus + self.A))

    @property
    def coupling(self):
        """Coefficient of ``i xi_j / A`` in the tangential beta equations, one per data column."""
        c = self._cache.get("coupling")
        if c is None:
            A = self.A[..., None]
            a = self.a
            c = self.fp.mu_plus * (a[..., 0, :] + A * a[..., 1, :]) - self.fp.mu_minus * (
                a[..., 2, :] + A * a[..., 3, :]
            )
            self._cache["coupling"] = c
        return c


def build_symbol_table(point: SpectralPoint, fp: FluidParams, *, floor: float = DET_FLOOR) -> SymbolTable:
    """Evaluate roots, the interface matrix, its cofactors and ``a = L^{-1} R``.

    Raises
    ------
    ZeroFrequencyError
        If ``xi' = 0`` anywhere in the batch.
    LopatinskiiDegeneracyError
        If ``|det L|`` drops below ``floor``.
    """
    if np.any(np.all(point.xi == 0, axis=-1)):
        raise ZeroFrequencyError("zero tangential frequency; filter the xi' = 0 mode")
    A, Bp, Bm, At = compute_roots(point, fp)
    L = interface_matrix(A, Bp, Bm, fp.mu_plus, fp.mu_minus)
    R = data_matrix(point.xi, A)
    det = detl_closed_form(A, Bp, Bm, fp.mu_plus, fp.mu_minus)
    if np.any(~(np.abs(det) > floor)):
        raise LopatinskiiDegeneracyError(f"|det L| below floor {floor:g}")
    C = cofactor_matrix(L)
    adj = np.swapaxes(C, -1, -2)
    a = (adj @ R) / det[..., None, None]
    lam = np.broadcast_to(point.lam, A.shape)
    tbl = SymbolTable(point, fp, A, Bp, Bm, At, L, R, det, C, a, np.zeros_like(det))
    # det * (lam - phi_{n,n}(0) * surface factor); phi_{n,n}(0) = a_{2,n} = -trace_sum / det
    tbl.lopatinskii = lam * det + tbl.trace_sum * fp.surface_factor(A)
    return tbl


def phi_trace(tbl: SymbolTable):
    """``phi_{n,+n}(0) = phi_{n,-n}(0) = a_{2,n}``, the normal velocity per unit normal stress jump."""
    return tbl.a[..., 1, tbl.n - 1]


# --------------------------------------------------------------------------
# velocity and pressure symbols
# --------------------------------------------------------------------------


def velocity_coefficients(tbl: SymbolTable, side):
    """Split every velocity symbol into ``CM * M_kernel + CE * exp(-+B x)``.

    Returns ``(CM, CE)`` each of shape ``batch + (n, 2n)``: row ``j`` is the
    velocity component, column the data entry (``[[g]]`` then ``[[h]]``).
    """
    s = normalize_side(side)
    key = ("vel", s)
    if key in tbl._cache:
        return tbl._cache[key]
    n = tbl.n
    a = tbl.a
    fp = tbl.fp
    A = tbl.A[..., None]
    rowM = a[..., 0, :] if s > 0 else a[..., 2, :]
    rowE = a[..., 1, :] if s > 0 else a[..., 3, :]
    shape = rowM.shape[:-1] + (n, 2 * n)
    CM = np.zeros(shape, dtype=complex)
    CE = np.zeros(shape, dtype=complex)
    CM[..., n - 1, :] = rowM
    CE[..., n - 1, :] = rowE
    S = tbl.S[..., None]
    c = tbl.coupling
    h_diag = fp.mu_minus * tbl.B_minus if s > 0 else -fp.mu_plus * tbl.B_plus
    for j in range(n - 1):
        ratio = 1j * tbl.xi[..., j, None] / A
        CM[..., j, :] = -s * ratio * rowM
        ce = ratio * c
        ce[..., j] += 1.0
        ce[..., n + j] += h_diag
        CE[..., j, :] = ce / S
    tbl._cache[key] = (CM, CE)
    return CM, CE


def pressure_coefficients(tbl: SymbolTable, side):
    """Pressure symbols are ``CP * exp(-+A x)``; returns ``CP`` of shape ``batch + (2n,)``."""
    s = normalize_side(side)
    fp = tbl.fp
    if s > 0:
        return -(fp.mu_plus * (tbl.B_plus + tbl.A) / tbl.A)[..., None] * tbl.a[..., 0, :]
    return (fp.mu_minus * (tbl.B_minus + tbl.A) / tbl.A)[..., None] * tbl.a[..., 2, :]


def _bx(arr, x):
    """Align batch array ``arr`` with the broadcast of ``x``."""
    return arr if np.ndim(x) == 0 else np.asarray(arr)


def _column(tbl, family, k):
    n = tbl.n
    if not 1 <= k <= n:
        raise IndexError(f"k must lie in 1..{n}")
    if family in ("phi", "chi"):
        return k - 1
    if family in ("psi", "omega"):
        return n + k - 1
    raise ValueError(f"unknown symbol family {family!r}")


def velocity_value(tbl, family, k, j, side, x_n, order=0):
    """``d^order/dx_n^order`` of ``phi_{k,+-j}`` (family 'phi') or ``psi_{k,+-j}`` ('psi')."""
    s = normalize_side(side)
    n = tbl.n
    if not 1 <= j <= n:
        raise IndexError(f"j must lie in 1..{n}")
    col = _column(tbl, family, k)
    CM, CE = velocity_coefficients(tbl, s)
    B = tbl.B(s)
    return CM[..., j - 1, col] * m_kernel(tbl.A, B, x_n, s, order) + CE[..., j - 1, col] * exp_kernel(
        B, x_n, s, order
    )


def pressure_value(tbl, family, k, side, x_n, order=0):
    """``d^order/dx_n^order`` of ``chi_{k,+-}`` (family 'chi') or ``omega_{k,+-}`` ('omega')."""
    s = normalize_side(side)
    col = _column(tbl, family, k)
    CP = pressure_coefficients(tbl, s)
    return CP[..., col] * exp_kernel(tbl.A, x_n, s, order)


@dataclass(frozen=True)
class SymbolRequest:
    """What to evaluate: a symbol kind, phase, indices, derivative order and ``x_n``.

    ``k`` and ``j`` are 1-based; ``m`` is the 1-based tangential index used by
    the ``i xi_m`` weighted variants; ``variant`` selects the S-family member.
    """

    kind: str
    side: int | str = 1
    k: int = 1
    j: int | None = None
    m: int | None = None
    order: int = 0
    x_n: float | np.ndarray = 0.0
    variant: int | None = None

    def __post_init__(self):
        if self.kind not in SYMBOL_KINDS:
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        object.__setattr__(self, "side", normalize_side(self.side))
        if not 0 <= self.order <= 3:
            raise ValueError("derivative order must be 0..3")
        _check_side(self.x_n, self.side)


def velocity_symbol(req: SymbolRequest, tbl: SymbolTable):
    """``phi_{k,+-j}`` (kind ``phi_vel``) or ``psi_{k,+-j}`` (``psi_vel``) at ``req.x_n``."""
    family = {"phi_vel": "phi", "psi_vel": "psi"}.get(req.kind)
    if family is None:
        raise ValueError(f"velocity_symbol cannot evaluate {req.kind!r}")
    j = tbl.n if req.j is None else req.j
    return velocity_value(tbl, family, req.k, j, req.side, req.x_n, req.order)


def pressure_symbol(req: SymbolRequest, tbl: SymbolTable):
    """``chi_{k,+-}`` (kind ``chi_press``) or ``omega_{k,+-}`` (``omega_press``)."""
    family = {"chi_press": "chi", "omega_press": "omega"}.get(req.kind)
    if family is None:
        raise ValueError(f"pressure_symbol cannot evaluate {req.kind!r}")
    return pressure_value(tbl, family, req.k, req.side, req.x_n, req.order)


def _s_prefactor(tbl, variant, side, m):
    """Multiplier and base derivative order for the six members of an S family."""
    s = normalize_side(side)
    B = tbl.B(s)
    rho_mu = tbl.fp.rho(s) / tbl.fp.mu(s)
    lam_half = np.sqrt(tbl.lam)
    invB2 = 1.0 / (B * B)
    if variant in (2, 6):
        if m is None or not 1 <= m <= tbl.n - 1:
            raise IndexError("variants 2 and 6 need a tangential index m in 1..n-1")
        xim = tbl.xi[..., m - 1]
    table = {
        1: (rho_mu * lam_half * invB2, 1),
        2: (1j * xim * invB2, 1) if variant == 2 else None,
        3: (np.ones_like(B), 0),
        4: (invB2, 1),
        5: (rho_mu * lam_half * invB2, 0),
        6: (1j * xim * invB2, 0) if variant == 6 else None,
    }
    if variant not in table:
        raise ValueError("S-family variant must be 1..6")
    return table[variant]


def s_family_value(tbl, kind, variant, k, side, x_n, *, j=None, m=None, order=0):
    """Composite symbol of the S^u or S^theta family, differentiated ``order`` times in x_n."""
    s = normalize_side(side)
    pre, base_order = _s_prefactor(tbl, variant, s, m)
    if kind == "S_u":
        family = "phi" if variant <= 3 else "psi"
        jj = tbl.n if j is None else j
        base = velocity_value(tbl, family, k, jj, s, x_n, base_order + order)
    elif kind == "S_theta":
        if variant == 5 and k == tbl.n:
            raise ExcludedSymbolError(
                "omega_{n,+-} is excluded from S^theta variant 5; use the A B^-2 omega_n weighting"
            )
        family = "chi" if variant <= 3 else "omega"
        base = pressure_value(tbl, family, k, s, x_n, base_order + order)
    else:
        raise ValueError(f"unknown S family {kind!r}")
    return pre * base


def s_family_symbol(kind: str, variant: int, req: SymbolRequest, tbl: SymbolTable):
    """Entry point mirroring the request-based API; ``kind`` is ``'S_u'`` or ``'S_theta'``."""
    return s_family_value(tbl, kind, variant, req.k, req.side, req.x_n, j=req.j, m=req.m, order=req.order)


def omega_n_weighted(tbl, side, x_n, order=0):
    """``A B^-2 omega_{n,+-}``, the replacement for the excluded S^theta member."""
    s = normalize_side(side)
    B = tbl.B(s)
    return tbl.A / (B * B) * pressure_value(tbl, "omega", tbl.n, s, x_n, order)


# --------------------------------------------------------------------------
# whole-space symbols
# --------------------------------------------------------------------------


def _full_frequency(xi_full):
    xi = np.asarray(xi_full, dtype=complex)
    r2 = np.sum(xi * xi, axis=-1)
    if np.any(r2 == 0):
        raise ZeroFrequencyError("zero full-space frequency")
    return xi, r2


def helmholtz_symbol(xi_full, lam, fp: FluidParams, side):
    """Velocity multiplier ``P(xi)/(rho lam + mu |xi|^2)`` and pressure multiplier ``-i xi/|xi|^2``.

    ``|xi|^2`` is the holomorphic ``sum xi_j^2`` so the same routine serves
    complexified frequencies.
    """
    xi, r2 = _full_frequency(xi_full)
    s = normalize_side(side)
    n = xi.shape[-1]
    P = np.eye(n) - xi[..., :, None] * xi[..., None, :] / r2[..., None, None]
    denom = fp.rho(s) * np.asarray(lam) + fp.mu(s) * r2
    return P / denom[..., None, None], -1j * xi / r2[..., None]


def appendixA_symbol(xi_full, lam, fp: FluidParams, k: int, side):
    """Multiplier of ``f_k`` in ``lam |grad'|^{-1} d_n psi_n``.

    ``lam`` replaces ``|lam|`` so the value is holomorphic; take the modulus
    only when reporting bounds.
    """
    xi, r2 = _full_frequency(xi_full)
    n = xi.shape[-1]
    if not 1 <= k <= n:
        raise IndexError(f"k must lie in 1..{n}")
    s = normalize_side(side)
    A2 = np.sum(xi[..., :-1] ** 2, axis=-1)
    A = sqrt_positive_real(A2)
    xin = xi[..., -1]
    lam = np.asarray(lam)
    base = lam * (1j * xin / A) / (fp.rho(s) * lam + fp.mu(s) * r2)
    if k == n:
        return base * A2 / r2
    return base * (-xin * xi[..., k - 1] / r2)
