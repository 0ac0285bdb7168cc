"""Report figures rendered to files next to the delimited output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import harness

_ORDER_STYLE = {"T0": ("o", "C0"), "T1": ("s", "C1"), "T2": ("^", "C2")}


def convergence_figure(report, path):
    """Log-log RMSE against fill distance, one series per Taylor order."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    orders = sorted({r.order for r in report.rows})
    slopes = {}
    try:
        slopes = {k: s for k, (s, _) in harness.convergence_slope(report).items()}
    except Exception:
        pass  # too few rows for a fit; plot the raw series anyway
    for order in orders:
        rows = sorted((r for r in report.rows if r.order == order), key=lambda r: r.fill)
        h = np.array([r.fill for r in rows])
        e = np.array([r.rmse for r in rows])
        marker, color = _ORDER_STYLE.get(order, ("x", "C3"))
        label = order
        if order in slopes:
            label = f"{order} (slope {slopes[order]:.2f})"
        ax.loglog(h, e, marker=marker, color=color, ls="-", label=label)
    ax.set_xlabel("fill distance")
    ax.set_ylabel("RMSE")
    cfg = report.config
    ax.set_title(f"{cfg.get('surface', '?')} / {cfg.get('function', '?')}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def points_figure(chart, nodes_xyz, eval_xyz, path):
    """3D scatter of node and evaluation positions on the surface."""
    fig = plt.figure(figsize=(6.0, 5.0))
    ax = fig.add_subplot(111, projection="3d")
    ax.scatter(*nodes_xyz.T, s=6, c="C0", marker=".", label="nodes", alpha=0.7)
    if eval_xyz is not None and len(eval_xyz):
        ax.scatter(*eval_xyz.T, s=40, c="C3", marker="*", label="evaluation")
    ax.set_box_aspect((1, 1, 1))
    ax.set_title(chart.kind)
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
