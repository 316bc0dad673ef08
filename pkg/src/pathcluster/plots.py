"""Figure rendering for the report commands.

Everything draws through the Agg backend and lands in files next to the
CSV/JSON output; nothing here opens a window.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _new_figure(width: float = 6.4):
    fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
    return fig, ax


def save_figure(fig, path, dpi: int = 150) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    return path


def _p_label(p) -> str:
    if isinstance(p, str):
        return p
    return "inf" if math.isinf(p) else f"{p:g}"


def table_figure(reports, title: str = "Clustering accuracy"):
    """Grouped bars of mean accuracy with std whiskers, one bar per cell."""
    fig, ax = _new_figure(7.0)
    labels = [f"{rep.variant}\np={_p_label(rep.p)}" for rep in reports]
    means = [100.0 * rep.mean for rep in reports]
    stds = [100.0 * rep.std for rep in reports]
    x = np.arange(len(reports))
    ax.bar(x, means, yerr=stds, capsize=3, color="#4878a8")
    ax.set_xticks(x, labels, fontsize=8)
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    return fig


def sweep_figure(rows, title: str = "Accuracy vs power weighting"):
    """One accuracy-vs-p curve per ambient dimension."""
    fig, ax = _new_figure()
    dims = sorted({row["dim"] for row in rows})
    for dim in dims:
        sub = sorted((row for row in rows if row["dim"] == dim),
                     key=lambda row: row["p"])
        ps = [row["p"] for row in sub]
        acc = [100.0 * row["mean_accuracy"] for row in sub]
        ax.plot(ps, acc, marker="o", markersize=3, label=f"D = {dim}")
    ax.set_xlabel("power p")
    ax.set_ylabel("accuracy (%)")
    ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3)
    return fig


def separation_figure(rows, title: str = "Path-distance separation vs sample size"):
    """Median intra-cluster spread (and inter-cluster floor, if any) vs n."""
    fig, ax = _new_figure()
    ns = [row["n"] for row in rows]
    med = [row["eps1_median"] for row in rows]
    q1 = [row["eps1_q1"] for row in rows]
    q3 = [row["eps1_q3"] for row in rows]
    ax.errorbar(ns, med,
                yerr=[np.subtract(med, q1), np.subtract(q3, med)],
                marker="o", capsize=3, label="max intra-cluster distance")
    if rows and rows[0].get("eps2_median") is not None:
        ax.plot(ns, [row["eps2_median"] for row in rows], marker="s",
                linestyle="--", label="min inter-cluster distance")
    ax.set_xlabel("points n")
    ax.set_ylabel("path distance")
    ax.set_xscale("log")
    ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3)
    return fig


def scaling_figure(rows, title: str = "Path k-NN graph build time"):
    """Log-log wall time vs n with a linear-growth guide."""
    fig, ax = _new_figure()
    ns = np.array([row["n"] for row in rows], dtype=float)
    secs = np.array([row["seconds"] for row in rows])
    ax.loglog(ns, secs, marker="o", label="measured")
    guide = secs[0] * ns / ns[0]
    ax.loglog(ns, guide, linestyle=":", color="gray", label="linear growth")
    ax.set_xlabel("points n")
    ax.set_ylabel("seconds")
    ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    return fig
