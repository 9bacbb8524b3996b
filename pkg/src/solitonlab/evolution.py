"""Admissible initial data and the split-step time integrator.

One step is the symmetric splitting

    half kinetic:  exp(-i |k|^2 dt / (4m))          (Fourier multiplier)
    rotation:      exp(-i (W_eps'(|psi|)/(2|psi|) + V) dt)   (pointwise)
    half kinetic

The rotation is the exact flow of the nonlinear and potential parts, since
they leave |psi| unchanged pointwise; both substeps are unitary, so charge
is conserved to rounding.  Consecutive half kinetic steps are fused when
several steps are taken in a row.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import grid as sp
from .errors import AdmissibilityError, BlowUpError, ParameterError, ResolutionError
from .ground_state import RescaledState
from .grid import SpatialGrid
from .model import (
    ComplexField, NonlinearitySpec, PhysicalParams, PotentialSpec, eval_W_eps_prime,
)
from .observables.energy import energy_report

MODULUS_FLOOR = 1e-15
BOUNDARY_CHARGE_TOL = 1e-10


@dataclass(frozen=True)
class PerturbationSpec:
    """phi_0 recipe: ``zero`` or a real Gaussian bump.

    The bump is amplitude * exp(-|x - qbar - offset|^2 / (2 width^2)).
    """

    kind: str = "zero"
    amplitude: float = 0.0
    width: float = 1.0
    offset: tuple = (0.0,)

    def __post_init__(self):
        if self.kind not in ("zero", "gaussian"):
            raise ParameterError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "gaussian" and not self.width > 0:
            raise ParameterError("perturbation width must be positive")
        object.__setattr__(self, "offset", tuple(float(v) for v in np.atleast_1d(self.offset)))

    def sample(self, grid: SpatialGrid, qbar) -> np.ndarray:
        if self.kind == "zero" or self.amplitude == 0:
            return np.zeros(grid.shape, dtype=complex)
        c = np.zeros(grid.dim)
        c += np.resize(np.asarray(qbar, float), grid.dim)
        off = np.zeros(grid.dim)
        off[: min(grid.dim, len(self.offset))] = self.offset[: grid.dim]
        c = (c + off).reshape((-1,) + (1,) * grid.dim)
        r2 = np.sum((grid.coords - c) ** 2, axis=0)
        return (self.amplitude * np.exp(-r2 / (2 * self.width**2))).astype(complex)


@dataclass(frozen=True, eq=False)
class InitialData:
    """Assembled psi_0 with its admissibility diagnostics."""

    field: ComplexField
    qbar: tuple
    pbar: tuple
    norm_deviation: float     # ||U_eps(.-q) e^{ipx} + phi_0||_2 - 1 before renormalizing
    energy: float             # E_eps(psi_0)
    realized_M: float         # E_eps(psi_0) - c0/eps^2
    boundary_charge: float

    @property
    def velocity(self) -> tuple:
        return self.pbar


def _vec(v, dim):
    out = np.zeros(dim)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size not in (1, dim):
        raise ParameterError(f"expected {dim} components, got {v.size}")
    out[:] = v if v.size == dim else v[0]
    return out


def boundary_charge(values, grid: SpatialGrid) -> float:
    """Charge carried within L/16 of any face of the box."""
    x = grid.coords
    L = np.asarray(grid.L).reshape((-1,) + (1,) * grid.dim)
    near = np.any(np.abs(x) >= L / 2 - L / 16, axis=0)
    return float(sp.integrate(np.where(near, np.abs(values) ** 2, 0.0), grid))


def assemble_initial_data(rs: RescaledState, qbar, pbar, params: PhysicalParams,
                          potential: PotentialSpec, c0: float,
                          phi0: Optional[np.ndarray] = None,
                          M_bound: Optional[float] = None) -> InitialData:
    """psi_0 = U_eps(x - qbar) e^{i pbar.x} + phi_0, renormalized to unit charge."""
    grid = rs.grid
    q = _vec(qbar, grid.dim)
    p = _vec(pbar, grid.dim)
    margin = 10 * rs.eps
    for a in range(grid.dim):
        if abs(q[a]) > grid.L[a] / 2 - margin:
            raise ParameterError(
                f"qbar[{a}]={q[a]} leaves less than 10*eps={margin} to the box face")
    phase = np.exp(1j * np.tensordot(p, grid.coords, axes=(0, 0)))
    psi = rs.shifted(q) * phase
    if phi0 is not None:
        phi0 = np.asarray(phi0, dtype=complex)
        if phi0.shape != grid.shape:
            raise ParameterError("perturbation does not match the grid")
        psi = psi + phi0
    norm = sp.l2_norm(psi, grid)
    if not norm > 0:
        raise ParameterError("assembled datum vanishes")
    psi = psi / norm
    bc = boundary_charge(psi, grid)
    if bc > BOUNDARY_CHARGE_TOL:
        raise ResolutionError(f"charge {bc:.3e} near the box faces; enlarge the box")
    f = ComplexField(grid, psi, 0.0)
    er = energy_report(f, rs.spec, PhysicalParams(params.m, rs.eps), potential)
    M = er.total - c0 / rs.eps**2
    if M_bound is not None and M > M_bound:
        raise AdmissibilityError(
            f"realized M = {M:.6g} exceeds the bound {M_bound:.6g}: datum not admissible")
    return InitialData(field=f, qbar=tuple(q), pbar=tuple(p), norm_deviation=float(norm - 1),
                       energy=er.total, realized_M=float(M), boundary_charge=bc)


def exact_free_soliton(t: float, rs: RescaledState, qbar, pbar, params: PhysicalParams) -> ComplexField:
    """U_eps(x - qbar - v t) exp(i(pbar.x - omega t)), omega = omega_eps + m|v|^2/2."""
    grid = rs.grid
    q = _vec(qbar, grid.dim)
    p = _vec(pbar, grid.dim)
    v = p / params.m
    omega = rs.omega + 0.5 * params.m * float(v @ v)
    phase = np.tensordot(p, grid.coords, axes=(0, 0)) - omega * t
    return ComplexField(grid, rs.shifted(q + v * t) * np.exp(1j * phase), t)


class SplitStepPropagator:
    """Symmetric kinetic/rotation/kinetic splitting with a fixed dt.

    dt may be negative (backward stepping) or zero (identity).
    """

    def __init__(self, grid: SpatialGrid, spec: NonlinearitySpec, params: PhysicalParams,
                 potential: PotentialSpec, dt: float):
        self.grid = grid
        self.spec = spec
        self.params = params
        self.potential = potential
        self.dt = float(dt)
        k2 = grid.k2
        self._half = np.exp(-1j * k2 * self.dt / (4 * params.m))
        self._full = self._half**2
        self._V = potential.value(grid.coords)

    @property
    def max_kinetic_phase(self) -> float:
        """Largest phase |k|^2 |dt| / (2m) of the kinetic multiplier."""
        return float(np.max(self.grid.k2) * abs(self.dt) / (2 * self.params.m))

    def _rotate(self, v):
        a = np.abs(v)
        live = a > MODULUS_FLOOR
        wp = eval_W_eps_prime(a, self.spec, self.grid.dim)
        rate = np.where(live, 0.5 * wp / np.where(live, a, 1.0), 0.0) + self._V
        return v * np.exp(-1j * rate * self.dt)

    def advance_values(self, v: np.ndarray, nsteps: int) -> np.ndarray:
        if nsteps <= 0 or self.dt == 0:
            return np.array(v, dtype=complex)
        g = self.grid
        v = sp.ifft(self._half * sp.fft(v, g), g)
        for i in range(nsteps):
            v = self._rotate(v)
            mult = self._full if i < nsteps - 1 else self._half
            v = sp.ifft(mult * sp.fft(v, g), g)
        return v

    def advance(self, psi: ComplexField, nsteps: int = 1) -> ComplexField:
        v = self.advance_values(psi.values, nsteps)
        t = psi.t + nsteps * self.dt
        if not np.all(np.isfinite(v)):
            raise BlowUpError(t)
        return ComplexField(psi.grid, v, t)


def step(psi: ComplexField, dt: float, spec: NonlinearitySpec, params: PhysicalParams,
         potential: PotentialSpec) -> ComplexField:
    """One symmetric split step of size dt."""
    return SplitStepPropagator(psi.grid, spec, params, potential, dt).advance(psi, 1)


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float = 1e-3
    T: float = 1.0
    sample_stride: int = 10
    checkpoint_stride: int = 0   # 0: no checkpoints

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not self.T >= 0:
            raise ParameterError(f"T must be nonnegative, got {self.T}")
        if self.sample_stride < 1:
            raise ParameterError("sample stride must be at least 1")
        if self.checkpoint_stride < 0:
            raise ParameterError("checkpoint stride must be nonnegative")
        n = self.T / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ParameterError(f"T={self.T} is not a whole number of steps dt={self.dt}")

    @property
    def nsteps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def sample_interval(self) -> float:
        return self.dt * self.sample_stride


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    records: dict = field(default_factory=dict)   # observer name -> list of outputs
    final: Optional[ComplexField] = None
    steps: int = 0


def evolve(psi0: ComplexField, cfg: EvolutionConfig, propagator: SplitStepPropagator,
           observers: Optional[dict] = None,
           checkpoint: Optional[Callable[[ComplexField], None]] = None) -> Trajectory:
    """Advance psi0 to T, calling every observer at t=0 and each sampling stride.

    ``observers`` maps names to callables of a :class:`ComplexField`; their
    return values are collected in ``Trajectory.records``.  Exceptions from
    observers or the checkpoint callback propagate.
    """
    if abs(propagator.dt - cfg.dt) > 1e-15 * max(1.0, cfg.dt):
        raise ParameterError("propagator and config disagree on dt")
    observers = dict(observers or {})
    traj = Trajectory(records={k: [] for k in observers})

    def observe(psi):
        traj.times.append(psi.t)
        for name, fn in observers.items():
            traj.records[name].append(fn(psi))

    psi = psi0
    observe(psi)
    # stop at every sampling and checkpoint time
    marks = set(range(cfg.sample_stride, cfg.nsteps + 1, cfg.sample_stride))
    if cfg.checkpoint_stride:
        marks |= set(range(cfg.checkpoint_stride, cfg.nsteps + 1, cfg.checkpoint_stride))
    marks.add(cfg.nsteps)
    done = 0
    for mark in sorted(marks):
        if mark == 0:
            continue
        v = propagator.advance_values(psi.values, mark - done)
        t = psi0.t + mark * cfg.dt
        if not np.all(np.isfinite(v)):
            raise BlowUpError(t)
        psi = ComplexField(psi0.grid, v, t)
        done = mark
        if mark % cfg.sample_stride == 0:
            observe(psi)
        if cfg.checkpoint_stride and mark % cfg.checkpoint_stride == 0 and checkpoint is not None:
            checkpoint(psi)
    traj.final = psi
    traj.steps = done
    return traj
