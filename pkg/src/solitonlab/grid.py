"""Periodic spatial grids and the spectral toolbox built on them.

All derivatives are Fourier multipliers and all integrals are the
trapezoidal rule on the torus, which is spectrally accurate for smooth
periodic integrands.  ``np.sum`` reduces with pairwise summation in the
natural array order, so quadratures are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ParameterError


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid covering [-L/2, L/2)^N."""

    dim: int
    L: tuple
    n: tuple

    def __post_init__(self):
        L = tuple(float(v) for v in np.atleast_1d(self.L))
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        if self.dim not in (1, 2, 3):
            raise ParameterError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if len(L) == 1 and self.dim > 1:
            L = L * self.dim
        if len(n) == 1 and self.dim > 1:
            n = n * self.dim
        if len(L) != self.dim or len(n) != self.dim:
            raise ParameterError("L and n need one entry per axis")
        for v in L:
            if not v > 0:
                raise ParameterError(f"extent must be positive, got {v}")
        for v in n:
            if v < 16 or not _is_pow2(v):
                raise ParameterError(f"point count must be a power of two >= 16, got {v}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "n", n)

    @classmethod
    def uniform(cls, dim: int, L: float, n: int) -> "SpatialGrid":
        return cls(dim, (L,) * dim, (n,) * dim)

    @property
    def periodic(self) -> bool:
        return True

    @property
    def shape(self) -> tuple:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def dx(self) -> tuple:
        return tuple(L / n for L, n in zip(self.L, self.n))

    @property
    def dV(self) -> float:
        return float(np.prod(self.dx))

    @cached_property
    def axes(self) -> tuple:
        return tuple(-L / 2 + (L / n) * np.arange(n) for L, n in zip(self.L, self.n))

    @cached_property
    def coords(self) -> np.ndarray:
        """Array of shape (dim, *shape) with the coordinates of every node."""
        return np.array(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple:
        return tuple(2 * np.pi * np.fft.fftfreq(n, L / n) for L, n in zip(self.L, self.n))

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumber arrays broadcast to (dim, *shape)."""
        return np.array(np.meshgrid(*self.wavenumbers, indexing="ij"))

    @cached_property
    def k2(self) -> np.ndarray:
        return np.sum(self.k**2, axis=0)

    @cached_property
    def displacement(self) -> np.ndarray:
        """Node coordinates in FFT order: index 0 is the origin.

        Used to sample kernels centred at the origin for circular convolution.
        """
        return np.array(
            np.meshgrid(*[np.fft.ifftshift(a) for a in self.axes], indexing="ij")
        )

    def refined(self, factor: int) -> "SpatialGrid":
        return SpatialGrid(self.dim, self.L, tuple(n * factor for n in self.n))

    def wrap(self, d):
        """Map displacements to the principal periodic cell [-L/2, L/2)."""
        d = np.asarray(d, dtype=float)
        L = np.asarray(self.L).reshape((-1,) + (1,) * (d.ndim - 1))
        return (d + L / 2) % L - L / 2

    def nearest_index(self, point) -> tuple:
        point = np.atleast_1d(np.asarray(point, dtype=float))
        idx = []
        for p, L, n in zip(point, self.L, self.n):
            idx.append(int(np.rint((p + L / 2) / (L / n))) % n)
        return tuple(idx)

    def describe(self) -> dict:
        return {"dim": self.dim, "L": list(self.L), "n": list(self.n)}


# spectral operators -------------------------------------------------------

def fft(f, grid: SpatialGrid):
    return np.fft.fftn(f, axes=tuple(range(-grid.dim, 0)))


def ifft(F, grid: SpatialGrid):
    return np.fft.ifftn(F, axes=tuple(range(-grid.dim, 0)))


def gradient(f, grid: SpatialGrid) -> np.ndarray:
    """Spectral gradient, shape (dim, *shape); real input gives real output."""
    F = fft(f, grid)
    out = np.array([ifft(1j * kk * F, grid) for kk in grid.k])
    return out.real if np.isrealobj(f) else out


def divergence(v, grid: SpatialGrid) -> np.ndarray:
    total = sum(ifft(1j * grid.k[a] * fft(v[a], grid), grid) for a in range(grid.dim))
    return total.real if np.isrealobj(v) else total


def laplacian(f, grid: SpatialGrid) -> np.ndarray:
    out = ifft(-grid.k2 * fft(f, grid), grid)
    return out.real if np.isrealobj(f) else out


def integrate(f, grid: SpatialGrid):
    """Trapezoidal quadrature over the box (last ``dim`` axes)."""
    return np.sum(f, axis=tuple(range(-grid.dim, 0))) * grid.dV


def l2_norm(f, grid: SpatialGrid) -> float:
    return float(np.sqrt(integrate(np.abs(f) ** 2, grid)))


def convolve(f, kernel_hat, grid: SpatialGrid):
    """Circular convolution with a kernel whose transform (times dV) is cached."""
    out = ifft(kernel_hat * fft(f, grid), grid)
    return out.real if np.isrealobj(f) else out


def translate(f, shift, grid: SpatialGrid):
    """Exact band-limited translation f(x) -> f(x - shift)."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    phase = np.exp(-1j * np.tensordot(shift, grid.k, axes=(0, 0)))
    out = ifft(fft(f, grid) * phase, grid)
    return out.real if np.isrealobj(f) else out


def _pad_axis(F, axis, n_new):
    n = F.shape[axis]
    F = np.moveaxis(F, axis, 0)
    out = np.zeros((n_new,) + F.shape[1:], dtype=complex)
    h = n // 2
    out[:h] = F[:h]
    out[n_new - h + 1:] = F[h + 1:]
    # split the Nyquist coefficient so real signals stay real
    out[h] = 0.5 * F[h]
    out[n_new - h] = 0.5 * F[h]
    return np.moveaxis(out, 0, axis)


def upsample(f, grid: SpatialGrid, factor: int):
    """Trigonometric interpolation of samples onto ``grid.refined(factor)``."""
    if factor == 1:
        return f
    fine = grid.refined(factor)
    F = fft(f, grid)
    for a in range(grid.dim):
        F = _pad_axis(F, F.ndim - grid.dim + a, fine.n[a])
    out = ifft(F, fine) * factor**grid.dim
    return out.real if np.isrealobj(f) else out
