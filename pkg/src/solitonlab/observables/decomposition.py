"""Soliton / wave splitting through a smoothed charge density.

rho = a * |psi|^2 with a compactly supported radial kernel a; the cutoff
chi = sqrt(phi(rho)) with phi = clip(rho - 1, 0, 1) selects the soliton
Psi = chi psi, and the halo is the shell {1 < rho < 2}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import grid as sp
from ..errors import DegenerateDecomposition, ParameterError, ResolutionError
from ..grid import SpatialGrid
from ..model import ComplexField, PhysicalParams, momentum_density

PLATEAU = 3.0
HALO_MARGIN = 1e-12


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def kernel_radii(eta: float) -> tuple:
    e8 = eta**0.125
    return e8 * (1 - e8), e8 * (1 + e8)


def support_radius(eta: float) -> float:
    """R_eps = eta^(1/8) (1 + 2 eta^(1/8)): radius of the ball holding the soliton."""
    e8 = eta**0.125
    return e8 * (1 + 2 * e8)


def annulus_radii(eta: float) -> tuple:
    """Inner/outer radii of the shell that must contain the halo.

    The inner radius is negative (empty inner ball) unless eta < 2**-8.
    """
    e8 = eta**0.125
    return e8 * (1 - 2 * e8), e8 * (1 + 2 * e8)


@dataclass(frozen=True, eq=False)
class DensityKernel:
    eta: float
    r_minus: float
    r_plus: float
    grid: SpatialGrid
    samples: np.ndarray      # a(|s|) in FFT order (origin at index 0)
    transform: np.ndarray    # fft(samples) * dV

    @property
    def plateau(self) -> float:
        return PLATEAU

    @property
    def gradient_bound(self) -> float:
        return self.eta**-0.25

    def profile(self, s):
        return kernel_profile(s, self.eta)

    def profile_slope(self, s):
        return kernel_profile_slope(s, self.eta)

    def max_slope(self) -> float:
        """Largest |a'| of the smooth profile (attained mid-shell)."""
        return 1.5 * PLATEAU / (self.r_plus - self.r_minus)


def kernel_profile(s, eta: float):
    rm, rp = kernel_radii(eta)
    t = (np.abs(s) - rm) / (rp - rm)
    return PLATEAU * (1.0 - smoothstep(t))


def kernel_profile_slope(s, eta: float):
    rm, rp = kernel_radii(eta)
    t = np.clip((np.abs(s) - rm) / (rp - rm), 0.0, 1.0)
    return -PLATEAU * 6.0 * t * (1.0 - t) / (rp - rm)


def build_kernel(eta: float, grid: SpatialGrid) -> DensityKernel:
    if not 0 < eta < 1:
        raise ParameterError(f"eta must lie in (0, 1), got {eta}")
    rm, rp = kernel_radii(eta)
    need = rp / 4
    if max(grid.dx) > need:
        raise ResolutionError(f"kernel support {rp:.4g} spans fewer than 4 cells", required_dx=need)
    if rp >= min(grid.L) / 2:
        raise ResolutionError(f"kernel support {rp:.4g} exceeds half the box")
    r = np.sqrt(np.sum(grid.displacement**2, axis=0))
    a = kernel_profile(r, eta)
    return DensityKernel(eta, rm, rp, grid, a, sp.fft(a, grid) * grid.dV)


def density_rho(psi: ComplexField, kernel: DensityKernel) -> np.ndarray:
    if psi.grid != kernel.grid:
        raise ParameterError("kernel built on a different grid")
    rho = sp.convolve(psi.density, kernel.transform, psi.grid)
    return np.maximum(rho, 0.0)


def cutoff_chi(rho) -> np.ndarray:
    return np.sqrt(np.clip(np.asarray(rho, dtype=float) - 1.0, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class SolitonDecomposition:
    rho: np.ndarray
    chi: np.ndarray
    soliton: np.ndarray
    wave: np.ndarray
    halo: np.ndarray
    R_eps: float
    eta: float
    degenerate: bool


def decompose(psi: ComplexField, kernel: DensityKernel) -> SolitonDecomposition:
    rho = density_rho(psi, kernel)
    chi = cutoff_chi(rho)
    soliton = chi * psi.values
    wave = psi.values - soliton
    halo = (rho > 1 + HALO_MARGIN) & (rho < 2 - HALO_MARGIN)
    return SolitonDecomposition(
        rho=rho, chi=chi, soliton=soliton, wave=wave, halo=halo,
        R_eps=support_radius(kernel.eta), eta=kernel.eta, degenerate=not np.any(chi > 0),
    )


@dataclass(frozen=True)
class SolitonState:
    q: tuple
    p: tuple
    mass: float
    t: float = 0.0

    @property
    def q_arr(self):
        return np.asarray(self.q)

    @property
    def p_arr(self):
        return np.asarray(self.p)


def peak_position(psi: ComplexField) -> np.ndarray:
    idx = np.unravel_index(int(np.argmax(psi.density)), psi.grid.shape)
    return np.array([psi.grid.axes[a][i] for a, i in enumerate(idx)])


def soliton_state(dec: SolitonDecomposition, psi: ComplexField,
                  params: PhysicalParams) -> SolitonState:
    if dec.degenerate:
        raise DegenerateDecomposition("cutoff vanishes everywhere: soliton dispersed")
    grid = psi.grid
    w = np.abs(dec.soliton) ** 2
    peak = peak_position(psi)
    d = grid.wrap(grid.coords - peak.reshape((-1,) + (1,) * grid.dim))
    window = np.all(np.abs(d) <= np.asarray(grid.L).reshape((-1,) + (1,) * grid.dim) / 4, axis=0)
    w_in = np.where(window, w, 0.0)
    charge = float(sp.integrate(w_in, grid))
    q = peak + sp.integrate(d * w_in[None], grid) / charge
    q = grid.wrap(q.reshape(-1, 1))[:, 0]
    p = sp.integrate(dec.chi[None] ** 2 * momentum_density(psi), grid)
    return SolitonState(
        q=tuple(float(v) for v in q),
        p=tuple(float(v) for v in np.atleast_1d(p)),
        mass=params.m * float(sp.integrate(w, grid)),
        t=psi.t,
    )


def concentration_point(psi: ComplexField, profile: np.ndarray,
                        tie_tol: float = 1e-12) -> tuple:
    """Minimiser of f(q) = || |psi| - U_eps(. - q) ||^2.

    ``profile`` is U_eps sampled on psi's grid and centred at the origin of the
    box.  Returns (q_hat, f(q_hat)).  Among numerically tied maxima of the
    cross-correlation the lowest flat (row-major) grid index wins.
    """
    grid = psi.grid
    u = psi.modulus
    g = np.fft.ifftshift(np.asarray(profile, dtype=float))
    corr = sp.ifft(sp.fft(u, grid) * np.conj(sp.fft(g, grid)), grid).real * grid.dV
    top = corr.max()
    cand = np.flatnonzero(corr.ravel() >= top - tie_tol * max(abs(top), 1.0))
    idx = np.unravel_index(int(cand[0]), grid.shape)

    shift = np.empty(grid.dim)
    c0 = corr[idx]
    c_peak = c0
    for a in range(grid.dim):
        lo = list(idx)
        hi = list(idx)
        lo[a] = (idx[a] - 1) % grid.n[a]
        hi[a] = (idx[a] + 1) % grid.n[a]
        cm, cp = corr[tuple(lo)], corr[tuple(hi)]
        curv = cm - 2 * c0 + cp
        # vertex of the parabola through the three samples along this axis
        off = 0.5 * (cm - cp) / curv if curv < 0 else 0.0
        off = float(np.clip(off, -0.5, 0.5))
        shift[a] = grid.axes[a][0] + (idx[a] + off) * grid.dx[a]
        c_peak -= 0.25 * (cm - cp) * off
    q_hat = grid.wrap(shift.reshape(-1, 1))[:, 0]
    f = (sp.integrate(u**2, grid) + sp.integrate(np.asarray(profile) ** 2, grid) - 2 * c_peak)
    return q_hat, float(max(f, 0.0))


def halo_in_annulus(dec: SolitonDecomposition, q_hat, grid: SpatialGrid) -> tuple:
    """Whether every halo node lies in the shell around q_hat.

    Returns (contained, min_distance, max_distance) over the halo nodes.
    """
    if not np.any(dec.halo):
        return True, float("nan"), float("nan")
    q_hat = np.asarray(q_hat, dtype=float).reshape((-1,) + (1,) * grid.dim)
    r = np.sqrt(np.sum(grid.wrap(grid.coords - q_hat) ** 2, axis=0))[dec.halo]
    r_in, r_out = annulus_radii(dec.eta)
    ok = bool(np.all(r <= r_out) and np.all(r >= r_in))
    return ok, float(r.min()), float(r.max())
