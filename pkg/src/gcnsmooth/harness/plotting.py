"""SVG figures for result rows.

Output is made reproducible by fixing the SVG hash salt and dropping the
date from the metadata.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import ResultRow  # noqa: E402

plt.rcParams["svg.hashsalt"] = "gcnsmooth"
plt.rcParams["figure.figsize"] = (5.0, 3.6)
plt.rcParams["axes.spines.top"] = False
plt.rcParams["axes.spines.right"] = False


def _series_label(r: ResultRow) -> str:
    parts = [r.estimator]
    if r.kind:
        parts.append(r.kind)
    return " ".join(parts)


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_vs_L(rows: list[ResultRow], metric: str, path, title: str = "", logy: bool = False):
    """One panel per (alpha, params) group, one line per estimator/kind. Returns the path or None."""
    groups = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if r.metric == metric and r.L is not None:
            groups[(r.params, r.alpha)][_series_label(r)].append((r.L, r.value))
    if not groups:
        return None
    keys = sorted(groups, key=lambda k: (k[0], -1.0 if k[1] is None else k[1]))
    fig, axes = plt.subplots(1, len(keys), figsize=(4.0 * len(keys), 3.4), squeeze=False, sharey=True)
    for ax, key in zip(axes[0], keys):
        for label in sorted(groups[key]):
            pts = sorted(groups[key][label])
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3, lw=1.2, label=label)
        params, alpha = key
        ax.set_title(f"alpha={alpha:g}" if alpha is not None else params.split("attach=")[-1], fontsize=9)
        ax.set_xlabel("L")
        if logy:
            ax.set_yscale("log")
    axes[0][0].set_ylabel(metric)
    axes[0][0].legend(fontsize=7, frameon=False)
    if title:
        fig.suptitle(title, fontsize=10)
    return _save(fig, Path(path))


def plot_optimal_L(rows: list[ResultRow], path):
    """Mean optimal depth against roughness, one line per estimator/kind."""
    series = defaultdict(list)
    for r in rows:
        if r.metric == "optimal_L":
            series[_series_label(r)].append((r.roughness, r.value, r.stderr or 0.0))
    if not series:
        return None
    fig, ax = plt.subplots()
    for label in sorted(series):
        pts = sorted(series[label])
        ax.errorbar([p[0] for p in pts], [p[1] for p in pts], yerr=[p[2] for p in pts],
                    marker="o", ms=3, lw=1.2, capsize=2, label=label)
    ax.set_xlabel("roughness")
    ax.set_ylabel("optimal L")
    ax.legend(fontsize=7, frameon=False)
    return _save(fig, Path(path))


FIGURES = {
    "risk": [("mse", False)],
    "sweep-l": [("val_mse", True)],
    "bias-variance": [("mse", True), ("bias_sq", True), ("variance", True)],
    "variance-decay": [("root_variance", True)],
    "predict": [("val_mse_mean", False)],
    "denoise": [("val_mse_mean", False)],
    "verify-bounds": [],
}


def render(experiment: str, rows: list[ResultRow], out_csv) -> list[Path]:
    """Write the figures for ``experiment`` next to ``out_csv``."""
    out_csv = Path(out_csv)
    stem = out_csv.with_suffix("")
    written = []
    for metric, logy in FIGURES.get(experiment, []):
        p = plot_vs_L(rows, metric, f"{stem}_{metric}.svg", title=experiment, logy=logy)
        if p is not None:
            written.append(p)
    if experiment == "sweep-l":
        p = plot_optimal_L(rows, f"{stem}_optimal_L.svg")
        if p is not None:
            written.append(p)
    return written
