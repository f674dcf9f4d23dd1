"""Figures for density sweeps."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from kgp.eval.sweep import SweepRow  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
}


def plot_sweep(rows: Sequence[SweepRow], path: str | Path) -> Path:
    """Quality panel (SF-EM, precision, avg. degree on a twin axis) and latency panel."""
    ok = [r for r in rows if r.error is None]
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, (ax_q, ax_t) = plt.subplots(1, 2, figsize=(7.0, 2.8))
        if ok:
            name = ok[0].hyperparameter[0]
            xs = [r.hyperparameter[1] for r in ok]
            ax_q.plot(xs, [r.sf_em for r in ok], "o-", label="SF-EM")
            ax_q.plot(xs, [r.precision for r in ok], "s--", label="Precision")
            ax_q.set_xlabel(f"{ok[0].method} {name}")
            ax_q.set_ylabel("rate")
            ax_q.set_ylim(-0.02, 1.02)
            twin = ax_q.twinx()
            twin.plot(xs, [r.avg_degree for r in ok], "^:", color="grey", label="avg. degree")
            twin.set_ylabel("avg. neighbors")
            handles = ax_q.get_legend_handles_labels()
            extra = twin.get_legend_handles_labels()
            ax_q.legend(handles[0] + extra[0], handles[1] + extra[1], loc="center right", frameon=False)

            ax_t.plot([r.avg_degree for r in ok], [r.match_latency * 1000 for r in ok], "o-")
            ax_t.set_xlabel("avg. neighbors")
            ax_t.set_ylabel("neighbor matching (ms)")
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path
