"""Command-line entry point.

    solitonlab <ground-state|evolve|sweep|compare|emit-plots> --config FILE [--out DIR] [--quiet]

Outputs go to <out>/<config hash>/, so distinct configurations never share a
directory.  Exit status: 0 success, 1 invalid configuration, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as sio
from .classical import compare, integrate_classical, particle_momentum, replay_effective
from .config import RunConfig, load_config
from .errors import ConfigError, ParameterError, SolitonLabError
from .grid import l2_norm
from .ground_state import sech2_oracle
from .observables.decomposition import support_radius
from .pipeline import ground_state_for, run_experiment
from .plots import emit_plot_data, overlay_from_columns
from .sweep import SweepPlan, run_sweep

log = logging.getLogger("solitonlab")


def _run_dir(cfg: RunConfig, out) -> Path:
    base = Path(out) if out else Path(cfg.output_dir)
    d = base / cfg.content_hash()
    d.mkdir(parents=True, exist_ok=True)
    return d


def _tag(eps: float) -> str:
    return f"{eps:.6g}".replace(".", "p")


def cmd_ground_state(cfg: RunConfig, rd: Path) -> None:
    run = cfg.run
    gs = ground_state_for(run)
    summary = {"omega": gs.omega, "energy": gs.energy, "residual": gs.residual,
               "iterations": gs.iterations, "grid": gs.grid.describe()}
    if run.dim == 1 and run.nu == 3 and run.coeff == 1:
        U, om, c0 = sech2_oracle(gs.grid, run.m)
        summary["closed_form"] = {"omega": om, "energy": c0,
                                  "profile_l2_error": l2_norm(gs.profile - U, gs.grid)}
    if "checkpoint" in cfg.formats:
        sio.save_checkpoint(gs.as_field(), rd / "ground_state.ckpt", run_id=cfg.content_hash())
    sio.write_json(summary, rd / "ground_state.json")
    log.info("ground state: omega=%.12g energy=%.12g residual=%.3e", gs.omega, gs.energy, gs.residual)


def _result_summary(res, cfg_hash: str) -> dict:
    out = {
        "config_hash": cfg_hash,
        "eps": res.spec.eps, "eta": res.spec.eta_value, "n": res.spec.n,
        "realized_M": res.initial.realized_M, "norm_deviation": res.initial.norm_deviation,
        "charge_deviation": res.charge_deviation(), "energy_drift": res.energy_drift(),
        "momentum_deviation": res.momentum_deviation(),
        "comparison": res.comparison.as_dict(),
        "halo_contained": all(s.halo_contained for s in res.samples if not s.degenerate),
        "max_qhat_offset": max(abs(np.asarray(s.qhat) - np.asarray(s.q)).max()
                               for s in res.samples if not s.degenerate),
        "R_eps": support_radius(res.spec.eta_value),
    }
    if res.replay is not None:
        out["replay"] = {"max_q": res.replay.max_q, "max_p": res.replay.max_p}
    return out


def cmd_evolve(cfg: RunConfig, rd: Path) -> None:
    run = cfg.run
    ckdir = rd / "checkpoints"
    hook = None
    if run.checkpoint_stride and "checkpoint" in cfg.formats:
        ckdir.mkdir(exist_ok=True)

        def hook(psi):
            step = int(round(psi.t / run.dt))
            sio.save_checkpoint(psi, ckdir / f"step{step:08d}.ckpt", run_id=cfg.content_hash())

    res = run_experiment(run, checkpoint=hook)
    sio.write_timeseries(res.samples, rd / "timeseries.csv", run.dim, res.classical)
    if "checkpoint" in cfg.formats:
        sio.save_checkpoint(res.final, rd / "final.ckpt", run_id=cfg.content_hash())
    sio.write_json(_result_summary(res, cfg.content_hash()), rd / "summary.json")
    c = res.comparison
    log.info("eps=%g: sup|q-q_cl|=%.3e max|K|=%.3e max|H|=%.3e", run.eps,
             c.sup_position_error, c.max_K, c.max_H)


def cmd_sweep(cfg: RunConfig, rd: Path) -> None:
    plan = SweepPlan(eps=cfg.sweep_eps, base=cfg.run, workers=cfg.workers)
    report = run_sweep(plan)
    for e in report.entries:
        if e.result is not None:
            sio.write_timeseries(e.result.samples, rd / f"timeseries_eps{_tag(e.eps)}.csv",
                                 cfg.run.dim, e.result.classical)
        log.info("eps=%g: %s %s", e.eps, e.status, e.error)
    sio.write_json(report.summary(), rd / "sweep.json")
    for k, v in report.verdicts.items():
        log.info("%s decreasing: %s", k, v)


def cmd_compare(cfg: RunConfig, rd: Path) -> None:
    path = rd / "timeseries.csv"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run 'evolve' with this config first")
    header, data = sio.read_timeseries(path)
    if data.shape[0] < 1:
        raise SolitonLabError("time series is empty")
    run = cfg.run
    t = sio.column(header, data, "t")
    q, p = sio.column(header, data, "q_eps"), sio.column(header, data, "p_eps")
    K, H, F = (sio.column(header, data, k) for k in ("K_eps", "H_eps", "F_eps"))
    m_eps = sio.column(header, data, "m_eps")
    pp = particle_momentum(p, m_eps, run.m)
    h = t[1] - t[0] if t.size > 1 else run.dt
    cls = integrate_classical(q[0], pp[0], run.potential, run.m, t[-1] - t[0], h)
    rep = compare(t - t[0], q, pp, cls, K=K, H=H, F=F, eps=run.eps, eta=run.eta_value,
                  R_eps=support_radius(run.eta_value))
    out = {"comparison": rep.as_dict()}
    if t.size >= 3:
        rr = replay_effective(t, q, p, m_eps, K, F, H, run.potential)
        out["replay"] = {"max_q": rr.max_q, "max_p": rr.max_p}
    sio.write_json(out, rd / "comparison.json")
    log.info("sup|q-q_cl|=%.3e", rep.sup_position_error)


def cmd_emit_plots(cfg: RunConfig, rd: Path) -> None:
    overlays = []
    for path in sorted(rd.glob("timeseries*.csv")):
        header, data = sio.read_timeseries(path)
        if data.shape[0] == 0:
            continue
        eps = cfg.run.eps
        if path.stem.startswith("timeseries_eps"):
            eps = float(path.stem[len("timeseries_eps"):].replace("p", "."))
        overlays.append(overlay_from_columns(
            eps, sio.column(header, data, "t"), sio.column(header, data, "q_eps"),
            sio.column(header, data, "qhat"), sio.column(header, data, "q_classical")))
    trend = None
    sweep_json = rd / "sweep.json"
    if sweep_json.exists():
        entries = [e for e in json.loads(sweep_json.read_text())["entries"] if e["status"] == "ok"]
        if entries:
            trend = {"eps": [e["eps"] for e in entries]}
            for k in ("sup_position_error", "max_K", "max_H", "F_coefficient"):
                trend[k] = [e[k] for e in entries]
    written = emit_plot_data(overlays, rd / "plots", trend)
    if not written:
        print(f"nothing to plot in {rd}: run 'evolve' or 'sweep' first", file=sys.stderr)
    for w in written:
        log.info("wrote %s", w)


COMMANDS = {
    "ground-state": cmd_ground_state,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "emit-plots": cmd_emit_plots,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="solitonlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--out", default=None, help="output root (default: [output].directory)")
        sp.add_argument("--quiet", action="store_true", help="only report errors")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    try:
        rd = _run_dir(cfg, args.out)
        COMMANDS[args.command](cfg, rd)
    except ParameterError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 1
    except (SolitonLabError, OSError) as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(rd)
    return 0


if __name__ == "__main__":
    sys.exit(main())
