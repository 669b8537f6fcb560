"""Figures written next to the stats and score reports.

Figures are built on bare :class:`matplotlib.figure.Figure` objects (no
pyplot global state), so rendering is safe from any thread and needs no
display.
"""

from __future__ import annotations

import math
import os

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .dataset import StatsReport
from .metrics import MetricsReport

_GOLDEN = (math.sqrt(5) - 1.0) / 2.0
# PNG metadata otherwise embeds the matplotlib version
_META = {"Software": None}


def _figure(width=8.0, height=None):
    fig = Figure(figsize=(width, height or width * _GOLDEN), facecolor="w")
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, dpi=100, metadata=_META, bbox_inches="tight")
    return path


def plot_prefix_distribution(stats: StatsReport, path):
    """Horizontal bar chart of QA counts per prefix, most frequent at the top."""
    items = sorted(stats.per_prefix.items(), key=lambda kv: kv[1][0])
    fig = _figure()
    ax = fig.add_subplot(111)
    ax.barh([s for s, _ in items], [c for _, (c, _) in items], color="#4c72b0")
    for i, (_, (count, prop)) in enumerate(items):
        if count:
            ax.text(count, i, f" {100 * prop:.0f}%", va="center", fontsize=8)
    ax.set_xlabel("QA pairs")
    ax.set_title(f"{stats.total_qas} QAs over {stats.sentences_with_qa} sentences")
    ax.tick_params(axis="y", labelsize=8)
    return _save(fig, path)


def plot_prefix_breakdown(report: MetricsReport, path):
    """Gold QAs per prefix next to how many got a matching predicted prefix."""
    items = list(report.per_prefix_breakdown.items())
    fig = _figure()
    ax = fig.add_subplot(111)
    ys = range(len(items))
    ax.barh([y + 0.2 for y in ys], [c for _, (c, _) in items], height=0.4,
            label="gold", color="#bbbbbb")
    ax.barh([y - 0.2 for y in ys], [m for _, (_, m) in items], height=0.4,
            label="prefix matched", color="#dd8452")
    ax.set_yticks(list(ys))
    ax.set_yticklabels([s for s, _ in items], fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("QA pairs")
    ax.set_title(f"UQA F1 {report.uqa_f1:.3f}, LQA {report.lqa_accuracy:.3f}, "
                 f"prefix acc. {report.prefix_accuracy:.3f}")
    ax.legend(loc="lower right", frameon=False)
    return _save(fig, path)
