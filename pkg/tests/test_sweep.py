import json
from collections import namedtuple

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solitonlab import sweep as sw
from solitonlab.classical import ComparisonReport
from solitonlab.errors import BlowUpError, DomainError, ParameterError, ResourceError
from solitonlab.model import PotentialSpec
from solitonlab.pipeline import RunSpec, ground_state_for
from solitonlab.sweep import (
    SweepEntry, SweepPlan, aggregate, fit_trend, run_sweep, strictly_decreasing,
)

SMALL = RunSpec(L=40.0, n=1024, eps=0.5, T=0.1, dt=1e-3, qbar=(1.0,), pbar=(0.5,),
                potential=PotentialSpec("zero"), oversample=2)


# trend fits -----------------------------------------------------------------

@pytest.mark.parametrize("slope", [1.0, 2.0, 0.0])
def test_fit_trend_power_laws(slope):
    eps = np.array([0.4, 0.2, 0.1, 0.05])
    fit = fit_trend(3.0 * eps**slope, eps)
    assert fit.slope == pytest.approx(slope, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_trend_errors():
    with pytest.raises(DomainError, match="below floor"):
        fit_trend([1.0, 0.0, 0.5], [0.4, 0.2, 0.1])
    with pytest.raises(ParameterError):
        fit_trend([1.0, 0.5], [0.4, 0.2])
    with pytest.raises(ParameterError):
        fit_trend([1.0, 0.5, 0.2], [0.4, 0.2])


def test_strictly_decreasing():
    assert strictly_decreasing([3, 2, 1])
    assert not strictly_decreasing([3, 3, 1])
    assert strictly_decreasing([1])


# plan --------------------------------------------------------------------------

def test_plan_sorts_and_validates():
    plan = SweepPlan(eps=(0.1, 0.4, 0.2), base=SMALL)
    assert plan.eps == (0.4, 0.2, 0.1)
    for bad in ((), (0.2, 0.2), (0.0,), (1.5,)):
        with pytest.raises(ParameterError):
            SweepPlan(eps=bad, base=SMALL)
    with pytest.raises(ParameterError):
        SweepPlan(eps=(0.2,), base=SMALL, workers=0)


def test_grid_rule():
    base = RunSpec(L=80.0, n=4096)
    plan = SweepPlan(eps=(0.4, 0.2, 0.1, 0.05), base=base)
    assert [plan.points_for(e) for e in plan.eps] == [4096, 4096, 8192, 16384]
    plan.check_grids()
    assert plan.run_spec(0.1).n == 8192 and plan.run_spec(0.1).eps == 0.1
    over = SweepPlan(eps=(0.1,), base=base, grid_overrides=((0.1, 2048),))
    assert over.points_for(0.1) == 2048
    with pytest.raises(ParameterError):
        over.check_grids()


# aggregation ---------------------------------------------------------------------

def _entry(eps, err, status="ok"):
    rep = ComparisonReport(err, err, err / 2, err / 3, err / 4, eps, eps, 1.0)
    return SweepEntry(eps, 1024, status, rep if status == "ok" else None,
                      "" if status == "ok" else "ParameterError: boom")


@settings(max_examples=30, deadline=None)
@given(perm=st.permutations(range(4)))
def test_aggregate_is_order_invariant(perm):
    entries = [_entry(0.4, 1.0), _entry(0.2, 0.5), _entry(0.1, 0.2), _entry(0.05, 0.1)]
    ref = aggregate(entries)
    rep = aggregate([entries[i] for i in perm])
    assert [e.eps for e in rep.entries] == [0.4, 0.2, 0.1, 0.05]
    assert rep.verdicts == ref.verdicts and rep.fits == ref.fits
    assert all(rep.verdicts.values())


def test_aggregate_with_failures_and_floors():
    rep = aggregate([_entry(0.4, 1.0), _entry(0.2, 0.5, "failed"), _entry(0.1, 0.2)])
    assert [e.eps for e in rep.completed()] == [0.4, 0.1]
    assert rep.verdicts["sup_position_error"]
    assert rep.fits["max_K"] == "too few completed runs"
    rep = aggregate([_entry(0.4, 1.0), _entry(0.2, 0.0), _entry(0.1, 0.2)])
    assert "below floor" in rep.fits["max_H"]
    assert not rep.verdicts["max_H"]
    json.dumps(rep.summary())


# running sweeps ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_gs():
    return ground_state_for(SMALL)


@pytest.fixture(scope="module")
def small_sweep(small_gs):
    return run_sweep(SweepPlan(eps=(0.6, 0.5), base=SMALL), small_gs)


def _dump(rep):
    return json.dumps(rep.summary(), sort_keys=True)


def test_small_sweep_runs(small_sweep):
    assert [e.status for e in small_sweep.entries] == ["ok", "ok"]
    for e in small_sweep.entries:
        assert e.result is not None and e.result.spec.eps == e.eps
        assert e.comparison.sup_position_error < 1e-3
    assert set(small_sweep.verdicts) == set(sw.TREND_KEYS)


def test_sweep_is_deterministic(small_gs, small_sweep):
    again = run_sweep(SweepPlan(eps=(0.5, 0.6), base=SMALL), small_gs)
    assert _dump(again) == _dump(small_sweep)


def test_sweep_shares_the_ground_state(small_gs, small_sweep):
    # solving the ground state inside the sweep gives the cached result
    fresh = run_sweep(SweepPlan(eps=(0.6, 0.5), base=SMALL))
    assert _dump(fresh) == _dump(small_sweep)


def test_sweep_with_workers(small_gs, small_sweep):
    par = run_sweep(SweepPlan(eps=(0.6, 0.5), base=SMALL, workers=2), small_gs, keep_results=False)
    assert _dump(par) == _dump(small_sweep)
    assert all(e.result is None for e in par.entries)


def test_partial_failure_is_recorded(monkeypatch, small_gs):
    real = sw.run_experiment

    def flaky(run, gs=None, **kw):
        if run.eps == 0.6:
            raise BlowUpError(0.05)
        return real(run, gs, **kw)

    monkeypatch.setattr(sw, "run_experiment", flaky)
    rep = run_sweep(SweepPlan(eps=(0.6, 0.5), base=SMALL), small_gs)
    assert {e.eps: e.status for e in rep.entries} == {0.6: "failed", 0.5: "ok"}
    failed = rep.entries[0]
    assert failed.error.startswith("BlowUpError") and failed.comparison is None
    assert [e.eps for e in rep.completed()] == [0.5]
    assert json.loads(json.dumps(rep.summary()))["entries"][0]["status"] == "failed"


def test_resource_check(monkeypatch, small_gs):
    Mem = namedtuple("Mem", "available")
    monkeypatch.setattr(sw.psutil, "virtual_memory", lambda: Mem(1024))
    with pytest.raises(ResourceError):
        run_sweep(SweepPlan(eps=(0.5,), base=SMALL), small_gs)
