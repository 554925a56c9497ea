"""Tangential torus plus graded vertical grid shared by all solvers."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Discretization of ``T^{n-1} x (-X, X)``.

    Parameters
    ----------
    n : int
        Space dimension, 2 or 3.
    N : tuple of int
        Points per tangential direction (even).
    L : tuple of float
        Tangential periods are ``2 pi L_j``, so wavenumbers are ``k / L_j``.
    X : float
        Vertical half-extent.
    Nv : int
        Vertical intervals per phase.
    beta : float
        Grading strength of ``x(z) = X (exp(beta z) - 1) / (exp(beta) - 1)``;
        ``beta -> 0`` recovers a uniform grid.
    Nz : int
        Points of the periodized vertical FFT used by the whole-space solve.
    """

    n: int = 2
    N: tuple = (16,)
    L: tuple = (1.0,)
    X: float = 10.0
    Nv: int = 64
    beta: float = 4.0
    Nz: int = 128

    def __post_init__(self):
        object.__setattr__(self, "N", tuple(int(v) for v in np.atleast_1d(self.N)))
        object.__setattr__(self, "L", tuple(float(v) for v in np.atleast_1d(self.L)))
        if self.n not in (2, 3):
            raise ValueError("n must be 2 or 3")
        if len(self.N) != self.n - 1 or len(self.L) != self.n - 1:
            raise ValueError(f"need {self.n - 1} tangential sizes and periods")
        if any(v < 2 or v % 2 for v in self.N):
            raise ValueError("tangential point counts must be even")
        if any(v <= 0 for v in self.L) or not self.X > 0:
            raise ValueError("periods and X must be positive")
        if self.Nv < 4 or self.Nz < 4 or self.Nz % 2:
            raise ValueError("need Nv >= 4 and an even Nz >= 4")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")

    # vertical -----------------------------------------------------------

    def _map(self, z):
        b = self.beta
        if b < 1e-8:
            return self.X * z, self.X * np.ones_like(z), np.zeros_like(z)
        c = self.X / np.expm1(b)
        e = np.exp(b * z)
        return c * (e - 1), c * b * e, c * b * b * e

    @property
    def zeta(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.Nv + 1)

    @property
    def x(self) -> np.ndarray:
        """Non-negative vertical nodes; node 0 is the trace plane."""
        return self._map(self.zeta)[0]

    @property
    def dx_dzeta(self) -> np.ndarray:
        return self._map(self.zeta)[1]

    @property
    def d2x_dzeta2(self) -> np.ndarray:
        return self._map(self.zeta)[2]

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights on the vertical nodes of one phase."""
        x = self.x
        w = np.zeros_like(x)
        h = np.diff(x)
        w[:-1] += h / 2
        w[1:] += h / 2
        return w

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.n, self.N, self.L, self.X, self.Nv * factor, self.beta, self.Nz)

    # tangential ---------------------------------------------------------

    @property
    def volume(self) -> float:
        return float(np.prod([2 * np.pi * v for v in self.L]))

    def wavenumbers(self) -> list:
        """Integer FFT indices per tangential direction."""
        return [np.fft.fftfreq(N, 1.0 / N).astype(int) for N in self.N]

    def mode_table(self):
        """All tangential modes as ``(index tuple array, integer k array, xi array)``."""
        ks = self.wavenumbers()
        idx = np.array(list(itertools.product(*[range(N) for N in self.N])), dtype=int)
        k = np.stack([ks[d][idx[:, d]] for d in range(self.n - 1)], axis=-1)
        xi = k / np.asarray(self.L)
        return idx, k, xi

    def tangential_points(self):
        return [2 * np.pi * L * np.arange(N) / N for N, L in zip(self.N, self.L)]

    def index_of(self, k) -> tuple:
        """FFT array index of the integer wavevector ``k``."""
        out = []
        for kj, N in zip(k, self.N):
            kj = int(kj)
            if not -N // 2 <= kj < N // 2:
                raise IndexError(f"mode index {kj} outside the grid of size {N}")
            out.append(kj % N)
        return tuple(out)

    @property
    def z_full(self) -> np.ndarray:
        """Nodes of the periodized vertical FFT on ``[-X, X)``."""
        return -self.X + 2 * self.X * np.arange(self.Nz) / self.Nz

    @property
    def kz(self) -> np.ndarray:
        return np.fft.fftfreq(self.Nz, 2 * self.X / self.Nz) * 2 * np.pi


def default_grid_for(xi_min: float, n: int = 2, **kw) -> GridSpec:
    """Grid with ``X`` chosen so ``exp(-xi_min X)`` is below round-off."""
    X = kw.pop("X", 40.0 / max(xi_min, 1e-12))
    N = kw.pop("N", (8,) * (n - 1))
    L = kw.pop("L", (1.0,) * (n - 1))
    return GridSpec(n=n, N=N, L=L, X=X, **kw)
