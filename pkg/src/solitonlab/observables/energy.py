"""First integrals: energy split, charge, momentum."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import grid as sp
from ..model import (
    DENSITY_FLOOR, ComplexField, NonlinearitySpec, PhysicalParams, PotentialSpec,
    eval_W_eps, momentum_density,
)


@dataclass(frozen=True)
class EnergyReport:
    total: float
    internal: float
    dynamical: float
    kinetic: float
    potential: float
    charge: float
    momentum: tuple
    t: float = 0.0

    def identity_gap(self) -> float:
        """|E - (J + G)| relative to max(|E|, 1)."""
        return abs(self.total - self.internal - self.dynamical) / max(abs(self.total), 1.0)


def internal_energy(u, grid, spec: NonlinearitySpec, params: PhysicalParams, eps=None) -> float:
    """J_eps(u) = int |grad u|^2/(2m) + W_eps(u) for a real profile u >= 0."""
    u = np.asarray(u, dtype=float)
    du = sp.gradient(u, grid)
    dens = np.sum(du**2, axis=0) / (2 * params.m) + eval_W_eps(np.abs(u), spec, grid.dim, eps)
    return float(sp.integrate(dens, grid))


def energy_report(psi: ComplexField, spec: NonlinearitySpec, params: PhysicalParams,
                  potential: PotentialSpec) -> EnergyReport:
    grid = psi.grid
    v = psi.values
    u2 = np.abs(v) ** 2
    grad = sp.gradient(v, grid)
    cross = np.conj(v)[None] * grad              # u grad u + i u^2 grad S
    inv = 1.0 / np.maximum(u2, DENSITY_FLOOR)
    grad_u2 = np.sum(cross.real**2, axis=0) * inv   # |grad u|^2
    flow2 = np.sum(cross.imag**2, axis=0) * inv     # |grad S|^2 u^2

    W = eval_W_eps(np.sqrt(u2), spec, grid.dim)
    Vx = potential.value(grid.coords)
    two_m = 2 * params.m

    internal = float(sp.integrate(grad_u2 / two_m + W, grid))
    kinetic = float(sp.integrate(flow2 / two_m, grid))
    pot = float(sp.integrate(Vx * u2, grid))
    total = float(sp.integrate(np.sum(np.abs(grad) ** 2, axis=0) / two_m + W + Vx * u2, grid))
    P = sp.integrate(cross.imag, grid)
    return EnergyReport(
        total=total, internal=internal, dynamical=kinetic + pot, kinetic=kinetic,
        potential=pot, charge=float(sp.integrate(u2, grid)),
        momentum=tuple(float(p) for p in np.atleast_1d(P)), t=psi.t,
    )


def total_momentum(psi: ComplexField) -> np.ndarray:
    return np.atleast_1d(sp.integrate(momentum_density(psi), psi.grid))
