"""Periodic grids, complex fields, and the norms measured on them.

Velocities carried by boosted waveforms must be multiples of the box phase
quantum 4*pi/L so that exp(i v x / 2) is single-valued on the torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import VelocityNotQuantized

__all__ = [
    "Grid1D",
    "Grid2D",
    "ComplexField",
    "norm_lp",
    "norm_l2",
    "norm_inf",
    "norm_h1",
    "spectral_gradient",
    "collar_mask",
]


def _check_power_of_two(n: int):
    if n < 4 or n & (n - 1):
        raise ValueError(f"grid size must be a power of two, got {n}")


class Grid1D:
    """Uniform periodic grid on [-L/2, L/2) with N points (power of two)."""

    d = 1

    def __init__(self, L: float, N: int):
        _check_power_of_two(N)
        self.L = float(L)
        self.N = int(N)
        self.dx = self.L / self.N
        self.x = (np.arange(self.N) - self.N // 2) * self.dx
        self.k = 2.0 * np.pi * sfft.fftfreq(self.N, d=self.dx)
        self.k_squared = self.k**2
        self.velocity_quantum = 4.0 * np.pi / self.L

    @property
    def cell_volume(self) -> float:
        return self.dx

    def quantize_velocity(self, v: float) -> float:
        return self.velocity_quantum * round(v / self.velocity_quantum)

    def velocity_quantized(self, v, tol: float = 1e-9) -> bool:
        v = np.atleast_1d(v)
        m = v / self.velocity_quantum
        return bool(np.all(np.abs(m - np.round(m)) < tol))

    def wrap(self, y):
        return (np.asarray(y) + 0.5 * self.L) % self.L - 0.5 * self.L

    def __eq__(self, other):
        return (
            isinstance(other, Grid1D) and other.L == self.L and other.N == self.N
        )

    def __repr__(self):
        return f"Grid1D(L={self.L}, N={self.N})"


class Grid2D:
    """Tensor-product periodic grid on [-L/2, L/2)^2 (solitons only)."""

    d = 2

    def __init__(self, L: float, N: int):
        _check_power_of_two(N)
        self.L = float(L)
        self.N = int(N)
        self.dx = self.L / self.N
        ax = (np.arange(self.N) - self.N // 2) * self.dx
        self.x, self.y = np.meshgrid(ax, ax, indexing="ij")
        k = 2.0 * np.pi * sfft.fftfreq(self.N, d=self.dx)
        kx, ky = np.meshgrid(k, k, indexing="ij")
        self.k_squared = kx**2 + ky**2
        self._k_axes = (kx, ky)
        self.velocity_quantum = 4.0 * np.pi / self.L

    @property
    def cell_volume(self) -> float:
        return self.dx**2

    def quantize_velocity(self, v):
        v = np.asarray(v, dtype=float)
        return self.velocity_quantum * np.round(v / self.velocity_quantum)

    def velocity_quantized(self, v, tol: float = 1e-9) -> bool:
        v = np.atleast_1d(v)
        m = v / self.velocity_quantum
        return bool(np.all(np.abs(m - np.round(m)) < tol))

    def wrap(self, y):
        return (np.asarray(y) + 0.5 * self.L) % self.L - 0.5 * self.L

    def __eq__(self, other):
        return (
            isinstance(other, Grid2D) and other.L == self.L and other.N == self.N
        )

    def __repr__(self):
        return f"Grid2D(L={self.L}, N={self.N})"


@dataclass(eq=False)
class ComplexField:
    """Time-stamped complex field bound to a periodic grid."""

    t: float
    values: np.ndarray
    grid: object

    def copy(self) -> "ComplexField":
        return ComplexField(self.t, self.values.copy(), self.grid)


def _masked(values, mask):
    return values if mask is None else values[mask]


def norm_lp(field_or_values, p: float, grid=None, mask=None) -> float:
    """L^p norm; with a mask only the kept cells enter the integral."""
    if isinstance(field_or_values, ComplexField):
        values, grid = field_or_values.values, field_or_values.grid
    else:
        values = field_or_values
    v = np.abs(_masked(values, mask))
    if math.isinf(p):
        return float(v.max(initial=0.0))
    return float((np.sum(v**p) * grid.cell_volume) ** (1.0 / p))


def norm_l2(field_or_values, grid=None, mask=None) -> float:
    return norm_lp(field_or_values, 2.0, grid=grid, mask=mask)


def norm_inf(field_or_values, grid=None, mask=None) -> float:
    return norm_lp(field_or_values, math.inf, grid=grid, mask=mask)


def spectral_gradient(values, grid):
    """Gradient via ik multipliers; returns a tuple of arrays in d=2."""
    if grid.d == 1:
        return sfft.ifft(1j * grid.k * sfft.fft(values))
    kx, ky = grid._k_axes
    v_hat = sfft.fft2(values)
    return (sfft.ifft2(1j * kx * v_hat), sfft.ifft2(1j * ky * v_hat))


def norm_h1(field_or_values, grid=None, mask=None) -> float:
    """Sobolev norm sqrt(||u||_2^2 + ||grad u||_2^2), spectral gradient.

    With a mask this is a local surrogate: the gradient is computed globally
    but only kept cells are integrated.
    """
    if isinstance(field_or_values, ComplexField):
        values, grid = field_or_values.values, field_or_values.grid
    else:
        values = field_or_values
    l2sq = norm_l2(values, grid=grid, mask=mask) ** 2
    g = spectral_gradient(values, grid)
    if grid.d == 1:
        gsq = norm_l2(g, grid=grid, mask=mask) ** 2
    else:
        gsq = sum(norm_l2(gi, grid=grid, mask=mask) ** 2 for gi in g)
    return math.sqrt(l2sq + gsq)


def collar_mask(grid, width: float | None = None):
    """Boolean keep-mask excluding the seam collar at the box edge."""
    if width is None:
        width = grid.L / 16.0
    if grid.d == 1:
        return np.abs(grid.x) <= grid.L / 2.0 - width
    return (np.abs(grid.x) <= grid.L / 2.0 - width) & (
        np.abs(grid.y) <= grid.L / 2.0 - width
    )


def require_quantized(grid, v):
    if not grid.velocity_quantized(v):
        raise VelocityNotQuantized(
            f"velocity {v} is not a multiple of 4*pi/L = {grid.velocity_quantum:.6g}"
        )
