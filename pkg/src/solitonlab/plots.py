"""Plot data files and SVG charts: trajectory overlays and eps trends.

Charts go through matplotlib's SVG writer with a fixed hash salt and no
date stamp, so identical inputs give byte-identical files; no display is
needed.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import FLOAT_FMT  # noqa: E402

_RC = {"svg.hashsalt": "solitonlab", "svg.fonttype": "none", "path.simplify": False}
_META = {"Date": None, "Creator": None}


@dataclass(frozen=True)
class Overlay:
    eps: float
    t: np.ndarray
    q: np.ndarray            # soliton barycenter (first axis)
    qhat: np.ndarray         # concentration point
    q_classical: np.ndarray  # particle


def overlay_from_columns(eps, t, q, qhat, q_classical) -> Overlay:
    first = lambda a: np.asarray(a, dtype=float).reshape(len(t), -1)[:, 0]  # noqa: E731
    return Overlay(float(eps), np.asarray(t, float), first(q), first(qhat), first(q_classical))


def _write_table(path: Path, header, cols):
    rows = np.column_stack(cols) if len(cols) else np.empty((0, 0))
    lines = [",".join(header)] + [",".join(FLOAT_FMT % v for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def _tag(eps: float) -> str:
    return f"{eps:.6g}".replace(".", "p")


def _save(fig, path: Path):
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def emit_plot_data(overlays: Sequence[Overlay], out_dir, trend: Optional[dict] = None) -> list:
    """Write the overlay chart of every run and, for a sweep, the trend chart.

    ``trend`` maps metric names to per-eps values and must carry an ``eps``
    list.  Returns the written paths; nothing is written for empty input.
    """
    out = Path(out_dir)
    written = []
    if not overlays and not trend:
        return written
    out.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_RC):
        for ov in overlays:
            tag = _tag(ov.eps)
            written.append(_write_table(out / f"overlay_eps{tag}.csv",
                                        ["t", "q_eps", "qhat", "q_classical"],
                                        [ov.t, ov.q, ov.qhat, ov.q_classical]))
            fig, (ax, ax2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
            ax.plot(ov.t, ov.q_classical, "k-", lw=1.5, label="particle")
            ax.plot(ov.t, ov.q, "C0--", lw=1.2, label="soliton barycenter")
            ax.plot(ov.t, ov.qhat, "C1:", lw=1.2, label="concentration point")
            ax.set_ylabel("position")
            ax.set_title(f"eps = {ov.eps:g}")
            ax.legend(loc="best", fontsize=8)
            ax2.semilogy(ov.t, np.maximum(np.abs(ov.q - ov.q_classical), 1e-16), "C0-")
            ax2.set_xlabel("t")
            ax2.set_ylabel("|q_eps - q|")
            fig.tight_layout()
            written.append(_save(fig, out / f"overlay_eps{tag}.svg"))
        if trend and len(trend.get("eps", [])) > 0:
            eps = np.asarray(trend["eps"], float)
            keys = [k for k in trend if k != "eps"]
            written.append(_write_table(out / "trend.csv", ["eps"] + keys,
                                        [eps] + [np.asarray(trend[k], float) for k in keys]))
            fig, ax = plt.subplots(figsize=(6, 4.5))
            for i, k in enumerate(keys):
                v = np.asarray(trend[k], float)
                ok = v > 0
                if np.any(ok):
                    ax.loglog(eps[ok], v[ok], marker="o", color=f"C{i}", label=k)
            ax.set_xlabel("eps")
            ax.set_ylabel("value")
            ax.legend(loc="best", fontsize=8)
            fig.tight_layout()
            written.append(_save(fig, out / "trend.svg"))
    return written
