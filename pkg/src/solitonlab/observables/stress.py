"""Stress tensor and the local momentum balance.

Sign convention: T is the tensor for which

    d/dt Im(conj(psi) grad psi) = -|psi|^2 grad V + div T

holds for solutions of  i psi_t = -(1/2m) Lap psi + 1/2 W_eps'(psi) + V psi.
That fixes

    T_jk = -(1/m) Re(d_j psi d_k conj(psi))
           + delta_jk [ (1/4m) Lap|psi|^2 - 1/2 W_eps'(|psi|)|psi| + W_eps(|psi|) ].

(the convective flux -(1/m) p^2 u^2 of a plane wave carries the minus sign).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import grid as sp
from ..model import (
    DENSITY_FLOOR, ComplexField, NonlinearitySpec, PhysicalParams, PotentialSpec,
    eval_W_eps, eval_W_eps_prime, momentum_density,
)


@dataclass(frozen=True, eq=False)
class StressField:
    components: np.ndarray  # (dim, dim, *shape)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.components)))

    def divergence(self, grid) -> np.ndarray:
        return np.array([sp.divergence(self.components[j], grid) for j in range(grid.dim)])


def _isotropic_part(u, grid, spec, params):
    u2 = u**2
    return (sp.laplacian(u2, grid) / (4 * params.m)
            - 0.5 * eval_W_eps_prime(u, spec, grid.dim) * u
            + eval_W_eps(u, spec, grid.dim))


def stress_tensor(psi: ComplexField, spec: NonlinearitySpec, params: PhysicalParams) -> StressField:
    grid = psi.grid
    v = psi.values
    g = sp.gradient(v, grid)
    iso = _isotropic_part(np.abs(v), grid, spec, params)
    T = -np.real(g[:, None] * np.conj(g)[None, :]) / params.m
    for j in range(grid.dim):
        T[j, j] += iso
    return StressField(T)


def stress_tensor_polar(psi: ComplexField, spec: NonlinearitySpec, params: PhysicalParams) -> StressField:
    """Same tensor from the polar variables: d_j u d_k u + (d_j S d_k S) u^2.

    Used as an independent cross-check of :func:`stress_tensor`.
    """
    grid = psi.grid
    v = psi.values
    u2 = np.abs(v) ** 2
    cross = np.conj(v)[None] * sp.gradient(v, grid)
    root = np.sqrt(np.maximum(u2, DENSITY_FLOOR))
    du = cross.real / root       # grad u
    flow = cross.imag / root     # u grad S
    T = -(du[:, None] * du[None, :] + flow[:, None] * flow[None, :]) / params.m
    iso = _isotropic_part(np.sqrt(u2), grid, spec, params)
    for j in range(grid.dim):
        T[j, j] += iso
    return StressField(T)


def momentum_law_residual(prev: ComplexField, cur: ComplexField, nxt: ComplexField,
                          spec: NonlinearitySpec, params: PhysicalParams,
                          potential: PotentialSpec) -> float:
    """Relative L2 residual of d_t j = -u^2 grad V + div T at ``cur``.

    d_t j is the centred difference of the two neighbouring snapshots, which
    must be equally spaced in time around ``cur``.
    """
    grid = cur.grid
    if not (prev.t < cur.t < nxt.t):
        raise ValueError("snapshots must be ordered in time")
    djdt = (momentum_density(nxt) - momentum_density(prev)) / (nxt.t - prev.t)
    rhs = (-cur.density[None] * potential.gradient(grid.coords)
           + stress_tensor(cur, spec, params).divergence(grid))
    scale = np.sqrt(sp.integrate(np.sum(djdt**2, axis=0), grid))
    res = np.sqrt(sp.integrate(np.sum((djdt - rhs) ** 2, axis=0), grid))
    return float(res / scale) if scale > 0 else float(res)
