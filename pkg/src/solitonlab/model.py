"""Domain types: fields, the nonlinearity family, potentials, parameters."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import grid as sp
from .errors import DomainError, ParameterError, ResolutionError
from .grid import SpatialGrid

# floor on u^2 wherever a quantity is divided by the density
DENSITY_FLOOR = 1e-30


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Samples of psi(t, .) on a periodic grid."""

    grid: SpatialGrid
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise ParameterError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "t", float(self.t))

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def charge(self) -> float:
        return float(sp.integrate(self.density, self.grid))

    def norm(self) -> float:
        return float(np.sqrt(self.charge()))

    def with_values(self, values, t=None) -> "ComplexField":
        return ComplexField(self.grid, values, self.t if t is None else t)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass(frozen=True)
class NonlinearitySpec:
    """W(s) = -coeff * s**nu / nu, and its eps-rescaled companion W_eps."""

    nu: float = 3.0
    coeff: float = 1.0
    eps: float = 1.0

    def __post_init__(self):
        if not self.nu > 2:
            raise ParameterError(f"exponent nu must exceed 2 (W''(0)=0), got {self.nu}")
        if not self.coeff > 0:
            raise ParameterError(f"amplitude coefficient must be positive, got {self.coeff}")
        if not self.eps > 0:
            raise ParameterError(f"eps must be positive, got {self.eps}")

    def critical_exponent(self, dim: int) -> float:
        return 2.0 + 4.0 / dim

    def is_subcritical(self, dim: int) -> bool:
        return self.nu < self.critical_exponent(dim)

    def with_eps(self, eps: float) -> "NonlinearitySpec":
        return NonlinearitySpec(self.nu, self.coeff, eps)


def _check_nonneg(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("W is defined on s >= 0 only")
    return s


def eval_W(s, spec: NonlinearitySpec):
    s = _check_nonneg(s)
    return -spec.coeff * s**spec.nu / spec.nu


def eval_W_prime(s, spec: NonlinearitySpec):
    s = _check_nonneg(s)
    return -spec.coeff * s ** (spec.nu - 1)


def eval_W_second(s, spec: NonlinearitySpec):
    s = _check_nonneg(s)
    return -spec.coeff * (spec.nu - 1) * s ** (spec.nu - 2)


def _eps_of(spec, eps):
    eps = spec.eps if eps is None else eps
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    return eps


def eval_W_eps(s, spec: NonlinearitySpec, dim: int = 1, eps: Optional[float] = None):
    """eps**-(N+2) * W(eps**(N/2) * s)."""
    eps = _eps_of(spec, eps)
    s = _check_nonneg(s)
    return eps ** -(dim + 2) * eval_W(eps ** (dim / 2) * s, spec)


def eval_W_eps_prime(s, spec: NonlinearitySpec, dim: int = 1, eps: Optional[float] = None):
    """eps**-(N/2+2) * W'(eps**(N/2) * s)."""
    eps = _eps_of(spec, eps)
    s = _check_nonneg(s)
    return eps ** -(dim / 2 + 2) * eval_W_prime(eps ** (dim / 2) * s, spec)


@dataclass(frozen=True)
class PotentialSpec:
    """Closed-form external potential.

    kind: ``zero``, ``harmonic`` (0.5*stiffness*|x-center|^2),
    ``linear`` (slope . x) or ``well``
    (depth * (1 - exp(-|x-center|^2 / (2 width^2))), bounded in [0, depth]).
    """

    kind: str = "zero"
    stiffness: float = 1.0
    slope: tuple = (0.0,)
    depth: float = 1.0
    width: float = 1.0
    center: tuple = (0.0,)

    KINDS = ("zero", "harmonic", "linear", "well")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown potential kind {self.kind!r}")
        object.__setattr__(self, "slope", tuple(float(v) for v in np.atleast_1d(self.slope)))
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if self.kind == "harmonic" and not self.stiffness > 0:
            raise ParameterError("harmonic stiffness must be positive")
        if self.kind == "well" and not (self.depth > 0 and self.width > 0):
            raise ParameterError("well depth and width must be positive")

    def _vec(self, values, dim):
        v = np.zeros(dim)
        values = np.asarray(values, dtype=float)
        v[: min(dim, values.size)] = values[:dim]
        return v

    def _shape(self, x):
        x = np.asarray(x, dtype=float)
        return x, x.shape[0]

    def value(self, x) -> np.ndarray:
        """V at points x of shape (dim, ...)."""
        x, dim = self._shape(x)
        pad = (slice(None),) + (None,) * (x.ndim - 1)
        if self.kind == "zero":
            return np.zeros(x.shape[1:])
        if self.kind == "linear":
            return np.tensordot(self._vec(self.slope, dim), x, axes=(0, 0))
        r2 = np.sum((x - self._vec(self.center, dim)[pad]) ** 2, axis=0)
        if self.kind == "harmonic":
            return 0.5 * self.stiffness * r2
        return self.depth * (1.0 - np.exp(-r2 / (2 * self.width**2)))

    def gradient(self, x) -> np.ndarray:
        """grad V at points x of shape (dim, ...); result has the same shape."""
        x, dim = self._shape(x)
        pad = (slice(None),) + (None,) * (x.ndim - 1)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "linear":
            return np.broadcast_to(self._vec(self.slope, dim)[pad], x.shape).copy()
        d = x - self._vec(self.center, dim)[pad]
        if self.kind == "harmonic":
            return self.stiffness * d
        r2 = np.sum(d**2, axis=0)
        return self.depth * d / self.width**2 * np.exp(-r2 / (2 * self.width**2))

    def bound(self, grid: SpatialGrid) -> float:
        """V_0: sup of V over the simulated box."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "well":
            return self.depth
        return float(np.max(self.value(grid.coords)))

    def describe(self) -> dict:
        return {
            "kind": self.kind, "stiffness": self.stiffness, "slope": list(self.slope),
            "depth": self.depth, "width": self.width, "center": list(self.center),
        }


@dataclass(frozen=True)
class PhysicalParams:
    m: float = 1.0
    eps: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise ParameterError(f"mass must be positive, got {self.m}")
        if not self.eps > 0:
            raise ParameterError(f"eps must be positive, got {self.eps}")


def momentum_density(psi: ComplexField) -> np.ndarray:
    """u^2 grad S computed as Im(conj(psi) grad psi), shape (dim, *shape)."""
    v = psi.values
    return np.imag(np.conj(v)[None] * sp.gradient(v, psi.grid))


# rescaling ----------------------------------------------------------------

SPECTRAL_CUTOFF = 1e-12


def resolved_spacing(values, grid: SpatialGrid, cutoff: float = SPECTRAL_CUTOFF) -> tuple:
    """Coarsest spacing per axis that still carries every Fourier mode of ``values``
    whose magnitude exceeds ``cutoff`` times the peak.  Infinite for constants."""
    F = np.abs(sp.fft(values, grid))
    keep = F > cutoff * F.max() if F.max() > 0 else np.zeros_like(F, dtype=bool)
    out = []
    for a in range(grid.dim):
        other = tuple(i for i in range(grid.dim) if i != a)
        mask = np.any(keep, axis=other) if other else keep
        ks = np.abs(grid.wavenumbers[a][mask])
        kmax = ks.max() if ks.size else 0.0
        out.append(np.inf if kmax == 0 else np.pi / kmax)
    return tuple(out)


def _eval_axis(F, axis, xi, x0, n, k, chunk=512):
    """Evaluate the trigonometric interpolant along ``axis`` at points ``xi``."""
    F = np.moveaxis(F, axis, 0)
    ny = n // 2
    out = np.empty((xi.size,) + F.shape[1:], dtype=complex)
    flat = F.reshape(n, -1)
    for s in range(0, xi.size, chunk):
        d = xi[s:s + chunk, None] - x0
        E = np.exp(1j * d * k[None, :])
        E[:, ny] = np.cos(k[ny] * d[:, 0])
        out[s:s + chunk] = (E @ flat).reshape((-1,) + F.shape[1:]) / n
    return np.moveaxis(out, 0, axis)


def _taper(xi, half, frac=0.1):
    """1 on |xi| <= (1-frac) half, raised cosine down to 0 at |xi| = half."""
    start = (1 - frac) * half
    t = np.clip((np.abs(xi) - start) / (half - start), 0.0, 1.0)
    return 0.5 * (1 + np.cos(np.pi * t))


def rescale_field(v: ComplexField, eps: float, target: Optional[SpatialGrid] = None) -> ComplexField:
    """u(x) = eps**(-N/2) v(x/eps), sampled on ``target`` (default: v's grid).

    v is evaluated through its trigonometric interpolant; points x/eps that
    fall outside v's box get zero (the profile must have decayed there).  A
    raised-cosine taper over the outer tenth of the source half-width joins
    the two smoothly, so the residual tail does not leave a jump whose
    derivatives would pollute spectral operators.
    """
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    src = v.grid
    target = src if target is None else target
    if target.dim != src.dim:
        raise ParameterError("source and target grids differ in dimension")
    if eps == 1.0 and target == src:
        return ComplexField(src, v.values.copy(), v.t)

    dx_ref = resolved_spacing(v.values, src)
    for a in range(src.dim):
        need = eps * dx_ref[a]
        if target.dx[a] > need:
            raise ResolutionError(
                f"axis {a}: target spacing {target.dx[a]:.4g} too coarse for eps={eps}; "
                f"need dx <= {need:.4g}",
                required_dx=need,
            )

    F = sp.fft(v.values, src)
    window = np.ones(target.shape)
    for a in range(src.dim):
        xi = target.axes[a] / eps
        half = src.L[a] / 2
        inside = (xi >= -half) & (xi < half)
        vals = np.zeros(target.n[a])
        vals[inside] = xi[inside]
        F = _eval_axis(F, a, vals, src.axes[a][0], src.n[a], src.wavenumbers[a])
        shape = [1] * target.dim
        shape[a] = -1
        window = window * _taper(xi, half).reshape(shape)
    out = F * window * eps ** (-src.dim / 2)
    return ComplexField(target, out, v.t)
