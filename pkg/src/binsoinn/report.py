"""Write evaluation tables as CSV and render the matching figures."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402
import numpy as np  # noqa: E402

from .pipeline import CurveResult, EvalReport, SweepResult  # noqa: E402

COLOR_BAR = {
    "blue": "#1f4fd1",
    "green": "#2ca02c",
    "red": "#d62728",
    "black": "#222222",
    "white": "#dddddd",
}


def write_rows(path: str | Path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    # fixed metadata so reruns produce identical files
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_eval_report(report: EvalReport, path: str | Path) -> Path:
    """Accuracy per group with false positive / negative counts on a twin axis."""
    names = list(report.groups)
    conf = [report.groups[g] for g in names]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(names) + 2), 3.5))
    ax.bar(x, [c.accuracy * 100 for c in conf], width=0.5, color="#7a9cc6", label="accuracy")
    ax.set_ylim(0, 100)
    ax.set_ylabel("accuracy (%)")
    ax.set_xticks(x, names)
    ax2 = ax.twinx()
    ax2.plot(x, [c.fp for c in conf], "o-", color="#d62728", label="FP")
    ax2.plot(x, [c.fn for c in conf], "s--", color="#333333", label="FN")
    ax2.set_ylabel("count")
    ax2.set_ylim(0, max([1] + [c.fp for c in conf] + [c.fn for c in conf]) * 1.15)
    ax2.yaxis.set_major_locator(MaxNLocator(integer=True))
    h1, l1 = ax.get_legend_handles_labels()
    h2, l2 = ax2.get_legend_handles_labels()
    ax.legend(h1 + h2, l1 + l2, loc="lower left", fontsize=8)
    return _finish(fig, path)


def plot_sweep(result: SweepResult, path: str | Path) -> Path:
    mean = result.mean_accuracy * 100
    fig, (ax, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    im = ax.imshow(mean, origin="lower", cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(result.ages)), result.ages)
    ax.set_yticks(range(len(result.lambdas)), result.lambdas)
    ax.set_xlabel("age threshold A")
    ax.set_ylabel("lambda")
    for a in range(mean.shape[0]):
        for b in range(mean.shape[1]):
            ax.text(b, a, f"{mean[a, b]:.1f}", ha="center", va="center", color="w", fontsize=8)
    fig.colorbar(im, ax=ax, label="mean accuracy (%)")
    labels = [f"{lam}/{age}" for lam in result.lambdas for age in result.ages]
    ax2.plot(range(len(labels)), mean.ravel(), "o-")
    ax2.set_xticks(range(len(labels)), labels, rotation=60, fontsize=7)
    ax2.set_xlabel("lambda / A")
    ax2.set_ylabel("mean accuracy (%)")
    return _finish(fig, path)


def plot_color_stats(stats: dict[str, dict[str, float]], path: str | Path) -> Path:
    """Grouped bars: mean share of each colour class per label."""
    labels = list(stats)
    colors = list(next(iter(stats.values()))) if stats else []
    x = np.arange(len(colors))
    width = 0.8 / max(1, len(labels))
    fig, ax = plt.subplots(figsize=(5, 3.2))
    hatches = ["", "//", "..", "xx"]
    for k, label in enumerate(labels):
        ax.bar(
            x + k * width,
            [stats[label][c] * 100 for c in colors],
            width,
            color=[COLOR_BAR.get(c, "grey") for c in colors],
            edgecolor="black",
            hatch=hatches[k % len(hatches)],
            label=label,
        )
    ax.set_xticks(x + width * (len(labels) - 1) / 2, colors)
    ax.set_ylabel("mean pixel share (%)")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def plot_learning_curve(curve: CurveResult, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.errorbar(curve.sizes, curve.accuracy.mean(axis=1) * 100, yerr=curve.accuracy.std(axis=1) * 100, marker="o")
    ax.set_xlabel("samples")
    ax.set_ylabel("accuracy (%)")
    ax2 = ax.twinx()
    ax2.plot(curve.sizes, curve.seconds.mean(axis=1), "s--", color="grey")
    ax2.set_ylabel("train + eval time (s)")
    return _finish(fig, path)


def sweep_table(result: SweepResult) -> str:
    head = "lambda\\A " + " ".join(f"{a:>8}" for a in result.ages)
    lines = [head]
    for a, lam in enumerate(result.lambdas):
        lines.append(f"{lam:>8} " + " ".join(f"{v * 100:8.2f}" for v in result.mean_accuracy[a]))
    return "\n".join(lines)


def report_table(report: EvalReport) -> str:
    lines = [f"{'group':<10}{'TP':>6}{'TN':>6}{'FP':>6}{'FN':>6}{'acc':>9}{'fp_rate':>9}{'fn_rate':>9}"]
    for g, c in report.groups.items():
        lines.append(
            f"{g:<10}{c.tp:>6}{c.tn:>6}{c.fp:>6}{c.fn:>6}{c.accuracy:>9.4f}{c.fp_rate:>9.4f}{c.fn_rate:>9.4f}"
        )
    return "\n".join(lines)
