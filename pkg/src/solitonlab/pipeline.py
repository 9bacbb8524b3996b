"""One complete experiment: ground state, initial datum, evolution,
observation, particle comparison."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .classical import (
    ClassicalTrajectory, ComparisonReport, ReplayResidual, compare, integrate_classical,
    particle_momentum, replay_effective,
)
from .evolution import (
    EvolutionConfig, InitialData, PerturbationSpec, SplitStepPropagator, Trajectory,
    assemble_initial_data, evolve,
)
from .ground_state import GroundState, RescaledState, rescale_ground_state, solve_ground_state
from .grid import SpatialGrid
from .model import ComplexField, NonlinearitySpec, PhysicalParams, PotentialSpec
from .observables.decomposition import support_radius
from .observables.observer import Observer, Sample, stack


@dataclass(frozen=True)
class RunSpec:
    dim: int = 1
    L: float = 80.0
    n: int = 4096
    m: float = 1.0
    nu: float = 3.0
    coeff: float = 1.0
    eps: float = 0.2
    potential: PotentialSpec = field(default_factory=lambda: PotentialSpec("harmonic", 1.0))
    qbar: tuple = (2.0,)
    pbar: tuple = (0.0,)
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    M_bound: Optional[float] = None
    dt: float = 1e-3
    T: float = 4.0
    sample_stride: int = 10
    checkpoint_stride: int = 0
    eta: Optional[float] = None      # None: eta = eps
    oversample: int = 8
    gs_tol: float = 1e-8

    @property
    def grid(self) -> SpatialGrid:
        return SpatialGrid.uniform(self.dim, self.L, self.n)

    @property
    def eta_value(self) -> float:
        return self.eps if self.eta is None else self.eta

    @property
    def base_spec(self) -> NonlinearitySpec:
        return NonlinearitySpec(self.nu, self.coeff, 1.0)

    @property
    def spec(self) -> NonlinearitySpec:
        return NonlinearitySpec(self.nu, self.coeff, self.eps)

    @property
    def params(self) -> PhysicalParams:
        return PhysicalParams(self.m, self.eps)

    def evolution_config(self) -> EvolutionConfig:
        return EvolutionConfig(self.dt, self.T, self.sample_stride, self.checkpoint_stride)


@dataclass(eq=False)
class RunResult:
    spec: RunSpec
    ground_state: GroundState
    rescaled: RescaledState
    initial: InitialData
    samples: list
    classical: ClassicalTrajectory
    comparison: ComparisonReport
    replay: Optional[ReplayResidual]
    final: ComplexField

    @property
    def times(self) -> np.ndarray:
        return stack(self.samples, "t")

    def column(self, name: str) -> np.ndarray:
        return stack(self.samples, name)

    def charge_deviation(self) -> float:
        return float(np.max(np.abs(self.column("C_charge") - 1.0)))

    def energy_drift(self) -> float:
        E = self.column("E_total")
        return float(np.max(np.abs(E - E[0])) / abs(E[0]))

    def momentum_deviation(self) -> float:
        P = self.column("P_total").reshape(len(self.samples), -1)
        return float(np.max(np.abs(P - np.asarray(self.initial.pbar)[None])))


def ground_state_for(run: RunSpec) -> GroundState:
    return solve_ground_state(run.base_spec, PhysicalParams(run.m, 1.0), run.grid, tol=run.gs_tol)


def run_experiment(run: RunSpec, gs: Optional[GroundState] = None,
                   checkpoint: Optional[Callable[[ComplexField], None]] = None,
                   replay: bool = True) -> RunResult:
    grid = run.grid
    if gs is None:
        gs = ground_state_for(run)
    rs = rescale_ground_state(gs, run.eps, grid)
    phi0 = run.perturbation.sample(grid, run.qbar)
    init = assemble_initial_data(rs, run.qbar, run.pbar, run.params, run.potential, gs.energy,
                                 phi0=phi0 if run.perturbation.kind != "zero" else None,
                                 M_bound=run.M_bound)
    cfg = run.evolution_config()
    prop = SplitStepPropagator(grid, run.spec, run.params, run.potential, run.dt)
    obs = Observer(grid, run.spec, run.params, run.potential, run.eta_value,
                   profile=rs.profile, oversample=run.oversample)
    traj: Trajectory = evolve(init.field, cfg, prop, {"sample": obs}, checkpoint=checkpoint)
    samples = traj.records["sample"]

    times = stack(samples, "t")
    # the particle starts at the soliton's position with the soliton's velocity
    p_particle = particle_momentum(stack(samples, "p"), stack(samples, "m_eps"), run.m)
    cls = integrate_classical(samples[0].q, p_particle[0], run.potential, run.m, run.T,
                              cfg.sample_interval)
    rep = None
    if replay and len(samples) >= 3:
        rep = replay_effective(times, stack(samples, "q"), stack(samples, "p"),
                               stack(samples, "m_eps"), stack(samples, "K"),
                               stack(samples, "F"), stack(samples, "H"), run.potential)
    cmp_ = compare(times, stack(samples, "q"), p_particle, cls,
                   K=stack(samples, "K"), H=stack(samples, "H"), F=stack(samples, "F"),
                   eps=run.eps, eta=run.eta_value, R_eps=support_radius(run.eta_value))
    return RunResult(run, gs, rs, init, samples, cls, cmp_, rep, traj.final)
