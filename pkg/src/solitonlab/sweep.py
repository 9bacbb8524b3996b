"""eps-sweeps of the full pipeline and trend aggregation."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
import psutil

from .classical import ComparisonReport
from .errors import DomainError, ParameterError, ResourceError, SolitonLabError
from .evolution import PerturbationSpec
from .ground_state import GroundState
from .model import PotentialSpec
from .pipeline import RunResult, RunSpec, ground_state_for, run_experiment

DEFAULT_EPS = (0.4, 0.3, 0.2, 0.15, 0.1)
# points per eps across the soliton core
CORE_POINTS = 8


def _next_pow2(v: float) -> int:
    return 1 << max(4, math.ceil(math.log2(v)))


@dataclass(frozen=True)
class SweepPlan:
    eps: tuple = DEFAULT_EPS
    base: RunSpec = field(default_factory=RunSpec)
    grid_overrides: tuple = ()     # ((eps, n), ...) taking precedence over the rule
    workers: int = 1

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        if not eps:
            raise ParameterError("sweep needs at least one eps")
        if len(set(eps)) != len(eps):
            raise ParameterError("eps values must be distinct")
        for e in eps:
            if not 0 < e <= 1:
                raise ParameterError(f"eps must lie in (0, 1], got {e}")
        # internal order is strictly decreasing whatever the input order
        object.__setattr__(self, "eps", tuple(sorted(eps, reverse=True)))
        object.__setattr__(self, "grid_overrides", tuple((float(e), int(n)) for e, n in self.grid_overrides))
        if self.workers < 1:
            raise ParameterError("workers must be at least 1")

    def points_for(self, eps: float) -> int:
        """n for this eps: the base count, refined until dx <= eps/8."""
        for e, n in self.grid_overrides:
            if e == eps:
                return n
        return max(self.base.n, _next_pow2(CORE_POINTS * self.base.L / eps))

    def run_spec(self, eps: float) -> RunSpec:
        return replace(self.base, eps=eps, n=self.points_for(eps))

    def check_grids(self):
        for e in self.eps:
            n = self.points_for(e)
            if self.base.L / n > e / CORE_POINTS:
                raise ParameterError(f"eps={e}: dx={self.base.L / n:.4g} exceeds eps/8")

    def estimated_bytes(self) -> int:
        """Peak memory of the largest run (observation grid dominates)."""
        n = max(self.points_for(e) for e in self.eps)
        fine = (n * self.base.oversample) ** self.base.dim
        return int(fine * 16 * 40 * min(self.workers, len(self.eps)))


@dataclass(frozen=True)
class TrendFit:
    slope: float
    r2: float


def fit_trend(values, eps) -> TrendFit:
    """Least-squares slope of log(value) against log(eps)."""
    v = np.asarray(values, dtype=float)
    e = np.asarray(eps, dtype=float)
    if v.shape != e.shape or v.ndim != 1 or v.size < 3:
        raise ParameterError("fit needs two equal-length lists of at least 3 values")
    if np.any(v <= 0) or np.any(e <= 0):
        raise DomainError("below floor: values must be positive to fit on a log scale")
    x, y = np.log(e), np.log(v)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss == 0 else 1.0 - float(np.sum(resid**2)) / ss
    if ss == 0:
        slope = 0.0
    return TrendFit(float(slope), float(r2))


@dataclass
class SweepEntry:
    eps: float
    n: int
    status: str                        # "ok" or "failed"
    comparison: Optional[ComparisonReport] = None
    error: str = ""
    result: Optional[RunResult] = field(default=None, repr=False)

    def summary(self) -> dict:
        out = {"eps": self.eps, "n": self.n, "status": self.status, "error": self.error}
        if self.comparison is not None:
            out.update(self.comparison.as_dict())
        return out


TREND_KEYS = ("sup_position_error", "max_K", "max_H", "F_coefficient")


@dataclass
class SweepReport:
    entries: list
    verdicts: dict
    fits: dict

    def completed(self) -> list:
        return [e for e in self.entries if e.status == "ok"]

    def summary(self) -> dict:
        return {
            "entries": [e.summary() for e in self.entries],
            "verdicts": dict(self.verdicts),
            "fits": {k: (asdict(v) if isinstance(v, TrendFit) else v) for k, v in self.fits.items()},
        }


def strictly_decreasing(values) -> bool:
    v = list(values)
    return all(b < a for a, b in zip(v, v[1:]))


def aggregate(entries) -> SweepReport:
    done = sorted((e for e in entries if e.status == "ok"), key=lambda e: -e.eps)
    verdicts, fits = {}, {}
    eps = [e.eps for e in done]
    for key in TREND_KEYS:
        vals = [getattr(e.comparison, key) for e in done]
        verdicts[key] = bool(len(vals) >= 2 and strictly_decreasing(vals))
        try:
            fits[key] = fit_trend(vals, eps)
        except DomainError as exc:
            fits[key] = str(exc)
        except ParameterError:
            fits[key] = "too few completed runs"
    return SweepReport(sorted(entries, key=lambda e: -e.eps), verdicts, fits)


def _run_one(args):
    run, gs, keep = args
    try:
        res = run_experiment(run, gs)
        return SweepEntry(run.eps, run.n, "ok", res.comparison, result=res if keep else None)
    except SolitonLabError as exc:
        return SweepEntry(run.eps, run.n, "failed", error=f"{type(exc).__name__}: {exc}")


def run_sweep(plan: SweepPlan, gs: Optional[GroundState] = None,
              keep_results: bool = True) -> SweepReport:
    """Run every eps of the plan and aggregate the trend verdicts.

    The eps-independent ground state is solved once on the base grid and
    shared by all runs.  A failed run is recorded and skipped.
    """
    plan.check_grids()
    need = plan.estimated_bytes()
    avail = psutil.virtual_memory().available
    if need > avail:
        raise ResourceError(f"sweep needs about {need / 2**30:.1f} GiB, {avail / 2**30:.1f} GiB free")
    if gs is None:
        gs = ground_state_for(plan.base)
    jobs = [(plan.run_spec(e), gs, keep_results) for e in plan.eps]
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as ex:
            entries = list(ex.map(_run_one, jobs))
    else:
        entries = [_run_one(j) for j in jobs]
    return aggregate(entries)
