"""Independent reference solutions built from explicit exponential modes.

Each phase is spanned by ``n - 1`` divergence-free Stokes modes decaying
like ``exp(-B|x_n|)`` and one potential mode driven by the harmonic
pressure ``exp(-A|x_n|)``.  The interface conditions are imposed by a
dense linear solve, so nothing here touches the interface matrix, its
cofactors or the closed determinant.
"""
from __future__ import annotations

import numpy as np


def _roots(lam, xi, rho, mu):
    A = np.sqrt(np.sum(np.asarray(xi, complex) ** 2))
    B = np.sqrt(rho * lam / mu + A * A)
    return A, B


def _modes(lam, xi, rho, mu, s):
    """Mode list for one phase: ``(rate, velocity vector, pressure amplitude)``.

    A mode is ``u = c exp(-s K x)``, ``theta = p exp(-s K x)`` for side ``s``.
    """
    xi = np.asarray(xi, complex)
    n = len(xi) + 1
    A, B = _roots(lam, xi, rho, mu)
    out = []
    for j in range(n - 1):
        c = np.zeros(n, complex)
        c[j] = B
        c[-1] = s * 1j * xi[j]
        out.append((B, c, 0.0))
    grad = np.concatenate([1j * xi, [-s * A]])
    out.append((A, -grad / (rho * lam), 1.0))
    return out


def _trace_rows(lam, xi, rho, mu, s):
    """Per mode: velocity trace, normal stress ``S nu`` at ``x_n = 0`` (``nu = -e_n``)."""
    xi = np.asarray(xi, complex)
    n = len(xi) + 1
    vel, stress = [], []
    for K, c, p in _modes(lam, xi, rho, mu, s):
        dc = -s * K * c
        sv = np.empty(n, complex)
        sv[: n - 1] = -mu * (1j * xi * c[-1] + dc[: n - 1])
        sv[-1] = -(2 * mu * dc[-1] - p)
        vel.append(c)
        stress.append(sv)
    return np.array(vel).T, np.array(stress).T


def modal_solve(lam, xi, fp, g, h, d=None, surface=False):
    """Coefficients of the modal expansion for jump data ``g``, ``h`` (and ``d`` with a free surface).

    Returns ``(coef_plus, coef_minus, eta)``.
    """
    xi = np.asarray(xi, complex)
    n = len(xi) + 1
    Vp, Sp = _trace_rows(lam, xi, fp.rho_plus, fp.mu_plus, 1)
    Vm, Sm = _trace_rows(lam, xi, fp.rho_minus, fp.mu_minus, -1)
    size = 2 * n + (1 if surface else 0)
    M = np.zeros((size, size), complex)
    rhs = np.zeros(size, complex)
    M[:n, :n], M[:n, n : 2 * n] = Sp, -Sm
    M[n : 2 * n, :n], M[n : 2 * n, n : 2 * n] = Vp, -Vm
    rhs[:n], rhs[n : 2 * n] = g, h
    if surface:
        A = np.sqrt(np.sum(xi ** 2))
        K = (fp.rho_plus - fp.rho_minus) * fp.c_g - fp.c_sigma * A * A
        M[n - 1, 2 * n] = K
        M[2 * n, :n] = Vp[-1]
        M[2 * n, 2 * n] = lam
        rhs[2 * n] = d
    sol = np.linalg.solve(M, rhs)
    return sol[:n], sol[n : 2 * n], (sol[2 * n] if surface else None)


def modal_velocity(lam, xi, fp, coef, side, x, order=0):
    """``d^m u / dx_n^m`` at signed heights ``x``; shape ``(n, len(x))``."""
    s = 1 if side > 0 else -1
    rho, mu = (fp.rho_plus, fp.mu_plus) if s > 0 else (fp.rho_minus, fp.mu_minus)
    x = np.asarray(x, float)
    out = 0
    for a, (K, c, _) in zip(coef, _modes(lam, xi, rho, mu, s)):
        out = out + a * c[:, None] * (-s * K) ** order * np.exp(-s * K * x)[None]
    return out


def modal_pressure(lam, xi, fp, coef, side, x):
    s = 1 if side > 0 else -1
    rho, mu = (fp.rho_plus, fp.mu_plus) if s > 0 else (fp.rho_minus, fp.mu_minus)
    K, _, p = _modes(lam, xi, rho, mu, s)[-1]
    return coef[-1] * p * np.exp(-s * K * np.asarray(x, float))


def normal_trace_per_unit_normal_stress(lam, xi, fp):
    """Normal velocity at the interface produced by a unit jump of the normal stress."""
    n = len(xi) + 1
    g = np.zeros(n, complex)
    g[-1] = 1.0
    cp, _, _ = modal_solve(lam, xi, fp, g, np.zeros(n))
    return modal_velocity(lam, xi, fp, cp, 1, [0.0])[-1, 0]


def height_per_kinematic_datum(lam, xi, fp):
    n = len(xi) + 1
    _, _, eta = modal_solve(lam, xi, fp, np.zeros(n), np.zeros(n), 1.0, surface=True)
    return eta


def det_by_expansion(M):
    """Laplace expansion along the first row; exact arithmetic on the entries given."""
    M = np.asarray(M)
    if M.shape == (1, 1):
        return M[0, 0]
    tot = 0
    for j in range(M.shape[1]):
        minor = np.delete(np.delete(M, 0, 0), j, 1)
        tot = tot + (-1) ** j * M[0, j] * det_by_expansion(minor)
    return tot
