"""Correction terms in the exact equations of motion of the soliton part.

With j = Im(conj(psi) grad psi), the flux J_rho = a * (j/m) satisfies
d_t rho + div J_rho = 0, and differentiating the soliton quantities gives

    dq/dt = p/m_s + K
    dp/dt = -grad V(q) + F + H

    K  = (1/m_s) int_halo (x - q) [ j . grad rho - m u^2 div J_rho ]
    H1 = int_halo j div J_rho
    H2 = grad V(q) - int grad V |Psi|^2
    H  = H2 - H1
    F  = -int_halo T . grad rho

where m_s is the soliton mass and T the stress tensor of
:mod:`solitonlab.observables.stress`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import grid as sp
from ..errors import DegenerateDecomposition
from ..model import ComplexField, NonlinearitySpec, PhysicalParams, PotentialSpec, momentum_density
from .decomposition import DensityKernel, SolitonDecomposition, SolitonState
from .stress import stress_tensor


@dataclass(frozen=True)
class HaloTerms:
    K: tuple
    H1: tuple
    H2: tuple
    F: tuple
    t: float = 0.0

    @property
    def H(self) -> tuple:
        return tuple(b - a for a, b in zip(self.H1, self.H2))

    def as_arrays(self) -> dict:
        return {k: np.asarray(getattr(self, k)) for k in ("K", "H1", "H2", "H", "F")}

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.as_arrays().values())


def _tup(v):
    return tuple(float(x) for x in np.atleast_1d(v))


def halo_terms(psi: ComplexField, dec: SolitonDecomposition, state: SolitonState,
               kernel: DensityKernel, spec: NonlinearitySpec, params: PhysicalParams,
               potential: PotentialSpec) -> HaloTerms:
    if dec.degenerate:
        raise DegenerateDecomposition("halo terms need a non-degenerate decomposition")
    grid = psi.grid
    m = params.m
    pad = (-1,) + (1,) * grid.dim
    sigma = dec.halo.astype(float)
    u2 = psi.density
    j = momentum_density(psi)

    grad_rho = sp.gradient(dec.rho, grid)
    J_rho = np.array([sp.convolve(j[a] / m, kernel.transform, grid) for a in range(grid.dim)])
    div_J = sp.divergence(J_rho, grid)

    q = np.asarray(state.q)
    d = grid.wrap(grid.coords - q.reshape(pad))
    flux = np.sum(j * grad_rho, axis=0) - m * u2 * div_J
    K = sp.integrate(sigma[None] * d * flux[None], grid) / state.mass

    H1 = sp.integrate(sigma[None] * j * div_J[None], grid)

    # grad V at the unwrapped positions around q, so the potential is sampled
    # consistently with the barycenter
    x_unwrapped = q.reshape(pad) + d
    soliton2 = np.abs(dec.soliton) ** 2
    H2 = (potential.gradient(q.reshape(pad))[(slice(None),) + (0,) * grid.dim]
          - sp.integrate(potential.gradient(x_unwrapped) * soliton2[None], grid))

    T = stress_tensor(psi, spec, params).components
    F = -sp.integrate(sigma[None] * np.einsum("jk...,k...->j...", T, grad_rho), grid)
    return HaloTerms(K=_tup(K), H1=_tup(H1), H2=_tup(H2), F=_tup(F), t=psi.t)


def potential_force_on_soliton(dec: SolitonDecomposition, state: SolitonState,
                               grid, potential: PotentialSpec) -> np.ndarray:
    """-int grad V |Psi|^2, the force term of the momentum law."""
    q = np.asarray(state.q)
    pad = (-1,) + (1,) * grid.dim
    x = q.reshape(pad) + grid.wrap(grid.coords - q.reshape(pad))
    return -sp.integrate(potential.gradient(x) * (np.abs(dec.soliton) ** 2)[None], grid)
