import time

import numpy as np
import pytest

from solitonlab.grid import SpatialGrid
from solitonlab.ground_state import solve_ground_state
from solitonlab.model import NonlinearitySpec, PhysicalParams, PotentialSpec
from solitonlab.pipeline import RunSpec, run_experiment
from solitonlab.sweep import SweepPlan, run_sweep

# desk-scale defaults
L, N_POINTS, DT = 80.0, 4096, 1e-3

_verdicts = []


def record(criterion, ok, detail):
    """Remember an acceptance verdict for the end-of-session summary."""
    _verdicts.append((criterion, bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(_verdicts, key=lambda v: v[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {crit}: {detail}")


@pytest.fixture(scope="session")
def grid():
    return SpatialGrid.uniform(1, L, N_POINTS)


@pytest.fixture(scope="session")
def small_grid():
    return SpatialGrid.uniform(1, L, 1024)


@pytest.fixture(scope="session")
def gs(grid):
    return solve_ground_state(NonlinearitySpec(), PhysicalParams(), grid)


@pytest.fixture(scope="session")
def gs_small(small_grid):
    return solve_ground_state(NonlinearitySpec(), PhysicalParams(), small_grid)


class _Capture:
    def __init__(self):
        self.fields = []

    def __call__(self, psi):
        self.fields.append(psi)


@pytest.fixture(scope="session")
def harmonic_run(gs):
    """eps=0.2, V = x^2/2, qbar=2, T=10: 10^4 steps at dt=1e-3."""
    cap = _Capture()
    run = RunSpec(eps=0.2, T=10.0, dt=DT, L=L, n=N_POINTS, qbar=(2.0,), pbar=(0.0,),
                  potential=PotentialSpec("harmonic", 1.0), checkpoint_stride=2500)
    res = run_experiment(run, gs, checkpoint=cap)
    return res, cap.fields


@pytest.fixture(scope="session")
def harmonic_sweep(gs):
    base = RunSpec(T=4.0, dt=DT, L=L, n=N_POINTS, qbar=(2.0,), pbar=(0.0,),
                   potential=PotentialSpec("harmonic", 1.0))
    plan = SweepPlan(eps=(0.4, 0.2, 0.1), base=base)
    t0 = time.perf_counter()
    rep = run_sweep(plan, gs)
    return rep, time.perf_counter() - t0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
