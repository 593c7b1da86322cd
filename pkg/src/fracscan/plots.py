"""Report figures written next to the delimited output.

Everything renders through the Agg backend with a fixed SVG hash salt and no
embedded creation date, so two runs with the same inputs produce byte-identical
files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "fracscan"

import matplotlib.pyplot as plt
import numpy as np

from .analysis import CorrelationMatrix, PcaReport
from .evaluation import AnnEvalSeries, CaseReport

_SAVE_KW = {"metadata": {"Date": None}, "bbox_inches": "tight"}


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def case_accuracy_figure(report: CaseReport, path: str | Path) -> None:
    """Average accuracy per case with min/max error bars."""
    cases = report.cases
    x = [c.n_train_images for c in cases]
    avg = np.array([c.avg_accuracy for c in cases]) * 100
    lo = avg - np.array([c.min_accuracy for c in cases]) * 100
    hi = np.array([c.max_accuracy for c in cases]) * 100 - avg
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.errorbar(x, avg, yerr=[lo, hi], fmt="o-", capsize=3, lw=1)
    ax.set_xlabel("training images")
    ax.set_ylabel("accuracy (%)")
    ax.set_title(f"{report.scheme} scheme: accuracy over cases")
    ax.grid(alpha=0.3)
    _save(fig, path)


def fp_fn_histogram(report: CaseReport, path: str | Path) -> None:
    cases = report.cases
    x = np.array([c.n_train_images for c in cases], dtype=float)
    width = 0.4
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(x - width / 2, [c.fp_pct for c in cases], width, label="false positives (%)")
    ax.bar(x + width / 2, [c.fn_pct for c in cases], width, label="false negatives (%)")
    ax.set_xlabel("training images")
    ax.set_ylabel("share of test contours (%)")
    ax.set_title(f"{report.scheme} scheme: false detections per case")
    ax.legend()
    _save(fig, path)


def roc_figure(points: list[tuple[float, float]], auc: float, scheme: str, path: str | Path) -> None:
    xs, ys = zip(*points)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(xs, ys, lw=1.5, label=f"AUC = {auc:.4f}")
    ax.plot([0, 1], [0, 1], "--", color="gray", lw=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title(f"{scheme} scheme ROC")
    ax.legend(loc="lower right")
    _save(fig, path)


def ann_series_figure(series: AnnEvalSeries, path: str | Path) -> None:
    if not series.entries:
        return
    x = [2 * per_class for per_class, _ in series.entries]
    y = [100 * acc for _, acc in series.entries]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(x, y, "o-", lw=1)
    ax.set_xlabel("training contours (balanced)")
    ax.set_ylabel("accuracy (%)")
    ax.set_title(f"{series.scheme} scheme: classifier accuracy vs training size")
    ax.grid(alpha=0.3)
    _save(fig, path)


def correlation_heatmap(corr: CorrelationMatrix, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 7))
    im = ax.imshow(corr.matrix, vmin=-1, vmax=1, cmap="RdBu_r")
    ax.set_xticks(range(len(corr.names)), corr.names, rotation=90, fontsize=7)
    ax.set_yticks(range(len(corr.names)), corr.names, fontsize=7)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title("feature correlation")
    _save(fig, path)


def pca_contributions_figure(report: PcaReport, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(range(len(report.names)), report.contributions)
    ax.set_xticks(range(len(report.names)), report.names, rotation=90, fontsize=7)
    ax.set_ylabel("|loading| on first component")
    ax.set_title(f"feature contributions ({report.label_filter}, n={report.n_rows})")
    _save(fig, path)
