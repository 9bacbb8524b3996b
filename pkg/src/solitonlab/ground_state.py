"""Ground state of the internal energy on the unit L2 sphere.

Minimises J(u) = int |grad u|^2/(2m) + W(u) subject to ||u||_2 = 1 by a
normalized gradient flow: one semi-implicit step

    u* = (1 + tau |k|^2/(2m))^-1  FFT[ u - tau (W'(u)/2 - omega u) ]

followed by projection back onto the sphere.  Keeping the multiplier
omega explicit makes the stationary points of the step the exact
solutions of -Lap U/(2m) + W'(U)/2 = omega U.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import grid as sp
from .errors import ConvergenceError, ParameterError
from .grid import SpatialGrid
from .model import (
    ComplexField, NonlinearitySpec, PhysicalParams, eval_W_eps_prime, eval_W_prime,
    rescale_field,
)
from .observables.energy import internal_energy


@dataclass(frozen=True, eq=False)
class GroundState:
    grid: SpatialGrid
    profile: np.ndarray
    omega: float
    energy: float
    residual: float
    iterations: int
    spec: NonlinearitySpec = field(default_factory=NonlinearitySpec)
    params: PhysicalParams = field(default_factory=PhysicalParams)
    history: tuple = ()

    def as_field(self) -> ComplexField:
        return ComplexField(self.grid, self.profile.astype(complex))


@dataclass(frozen=True, eq=False)
class RescaledState:
    grid: SpatialGrid
    profile: np.ndarray
    eps: float
    omega: float
    residual: float
    spec: NonlinearitySpec = field(default_factory=NonlinearitySpec)
    params: PhysicalParams = field(default_factory=PhysicalParams)

    def as_field(self) -> ComplexField:
        return ComplexField(self.grid, self.profile.astype(complex))

    def shifted(self, q) -> np.ndarray:
        """U_eps(x - q) by exact band-limited translation."""
        return sp.translate(self.profile, q, self.grid)


def _apply_H(u, grid, spec, params, eps=None):
    """-Lap u/(2m) + W'_eps(u)/2 for real u >= 0 (eps=None: unscaled W)."""
    lap = sp.laplacian(u, grid)
    a = np.abs(u)
    wp = eval_W_prime(a, spec) if eps is None else eval_W_eps_prime(a, spec, grid.dim, eps)
    return -lap / (2 * params.m) + 0.5 * wp * np.sign(u)


def lagrange_multiplier(u, grid: SpatialGrid, spec: NonlinearitySpec,
                        params: PhysicalParams, eps: Optional[float] = None) -> float:
    """omega = int |grad u|^2/(2m) + W'(u) u / 2 for a unit-norm profile."""
    u = np.asarray(u, dtype=float)
    du = sp.gradient(u, grid)
    a = np.abs(u)
    wp = eval_W_prime(a, spec) if eps is None else eval_W_eps_prime(a, spec, grid.dim, eps)
    return float(sp.integrate(np.sum(du**2, axis=0) / (2 * params.m) + 0.5 * wp * a, grid))


def el_residual(u, omega, grid, spec, params, eps=None) -> np.ndarray:
    return _apply_H(np.asarray(u, float), grid, spec, params, eps) - omega * u


def _normalize(u, grid):
    return u / np.sqrt(sp.integrate(u**2, grid))


def _recentre(u, grid):
    """Translate so the charge barycenter sits at the box centre."""
    w = u**2
    x = grid.coords.copy()
    # the node at -L/2 is its own periodic mirror; giving it x = 0 keeps
    # the barycenter of a reflection-symmetric profile exactly at the centre
    for a in range(grid.dim):
        idx = [a] + [slice(None)] * grid.dim
        idx[a + 1] = 0
        x[tuple(idx)] = 0.0
    c = sp.integrate(x * w[None], grid) / sp.integrate(w, grid)
    return sp.translate(u, -c, grid)


def solve_ground_state(spec: NonlinearitySpec, params: PhysicalParams, grid: SpatialGrid,
                       tol: float = 1e-8, tau: float = 1.0, max_iter: int = 100_000,
                       track_history: bool = False) -> GroundState:
    if spec.eps != 1.0:
        raise ParameterError("the ground state is computed at eps = 1; rescale afterwards")
    if not spec.is_subcritical(grid.dim):
        raise ParameterError(
            f"exponent nu={spec.nu} is not mass-subcritical (need nu < {spec.critical_exponent(grid.dim)})")
    if not tol > 0 or not tau > 0:
        raise ParameterError("tol and tau must be positive")

    width = min(grid.L) / 16
    r2 = np.sum(grid.coords**2, axis=0)
    u = _normalize(np.exp(-r2 / (2 * width**2)), grid)
    J = internal_energy(u, grid, spec, params)
    hist = [J] if track_history else []
    res = np.inf
    it = 0
    for it in range(max_iter + 1):
        omega = lagrange_multiplier(u, grid, spec, params)
        res = sp.l2_norm(el_residual(u, omega, grid, spec, params), grid)
        if res <= tol:
            break
        if it == max_iter:
            raise ConvergenceError(f"ground state flow did not converge in {max_iter} iterations", res)
        wp = 0.5 * eval_W_prime(np.abs(u), spec) * np.sign(u)
        while True:
            F = sp.fft(u - tau * (wp - omega * u), grid) / (1 + tau * grid.k2 / (2 * params.m))
            cand = _normalize(sp.ifft(F, grid).real, grid)
            J_new = internal_energy(cand, grid, spec, params)
            # energy must not increase; otherwise shrink the step
            if J_new <= J + 1e-14 * max(1.0, abs(J)) or tau < 1e-8:
                break
            tau *= 0.5
        u, J = cand, J_new
        if track_history:
            hist.append(J)

    if np.sum(u) < 0:
        u = -u
    u = _recentre(u, grid)
    u = _normalize(np.abs(u), grid)
    omega = lagrange_multiplier(u, grid, spec, params)
    res = sp.l2_norm(el_residual(u, omega, grid, spec, params), grid)
    return GroundState(
        grid=grid, profile=u, omega=omega, energy=internal_energy(u, grid, spec, params),
        residual=float(res), iterations=it, spec=spec, params=params, history=tuple(hist),
    )


def rescale_ground_state(gs: GroundState, eps: float,
                         grid: Optional[SpatialGrid] = None) -> RescaledState:
    target = gs.grid if grid is None else grid
    f = rescale_field(gs.as_field(), eps, target)
    U = f.values.real.copy()
    omega = gs.omega / eps**2
    spec = gs.spec.with_eps(eps)
    params = PhysicalParams(gs.params.m, eps)
    res = sp.l2_norm(el_residual(U, omega, target, spec, params, eps), target)
    return RescaledState(grid=target, profile=U, eps=eps, omega=omega, residual=float(res),
                         spec=spec, params=params)


def tail_mass(profile, grid: SpatialGrid, R: float) -> float:
    """int_{|x| > R} U^2."""
    r = np.sqrt(np.sum(grid.coords**2, axis=0))
    return float(sp.integrate(np.where(r > R, np.asarray(profile) ** 2, 0.0), grid))


def reflection_asymmetry(profile, grid: SpatialGrid) -> float:
    """max |U(x) - U(-x)| over samples, reflecting about the box centre.

    Node 0 sits at -L/2, so x -> -x maps index i to (n - i) mod n.
    """
    u = np.asarray(profile)
    v = u
    for a in range(grid.dim):
        v = np.roll(np.flip(v, axis=a), 1, axis=a)
    return float(np.max(np.abs(u - v)))


def sech2_oracle(grid: SpatialGrid, m: float = 1.0) -> tuple:
    """Closed-form 1D ground state for W(s) = -s^3/3: (U, omega, c0)."""
    B = (m**2 / 48.0) ** (1.0 / 3.0)
    A = 6 * B**2 / m
    x = grid.coords[0]
    U = A / np.cosh(B * x) ** 2
    omega = -2 * B**2 / m
    # int U'^2 = 16 A^2 B / 15, int U^3 = 16 A^3 / (15 B)
    c0 = 8 * A**2 * B / (15 * m) - 16 * A**3 / (45 * B)
    return U, omega, c0
