"""Classifier metrics, ROC/AUC, and the two evaluation protocols.

The system evaluation trains on whole images (contours keep image context) and
scores a fixed held-out image pool, repeating each case over several seeded
simulations.  The ANN evaluation trains on balanced random contours without
image context and scores a fixed held-out contour set.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ann
from .dataset import DatasetSplit, LabelledContour, scheme_rows, split_ann_eval, split_system_eval
from .errors import InsufficientDataError, UndefinedMetricError
from .features import FeatureNormalizer, to_vector


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, predictions: np.ndarray, truths: np.ndarray) -> "ConfusionCounts":
        p = np.asarray(predictions).astype(bool)
        t = np.asarray(truths).astype(bool)
        return cls(
            tp=int(np.sum(p & t)),
            fp=int(np.sum(p & ~t)),
            tn=int(np.sum(~p & ~t)),
            fn=int(np.sum(~p & t)),
        )


def metrics(c: ConfusionCounts) -> dict[str, float | None]:
    """Accuracy, sensitivity and specificity; undefined metrics come back as None.

    ``false_positive_rate`` (FP / (FP + TN)) is reported alongside under its
    own name since it is the ROC x-axis.
    """
    def ratio(num: int, den: int) -> float | None:
        return num / den if den else None

    return {
        "accuracy": ratio(c.tp + c.tn, c.total),
        "sensitivity": ratio(c.tp, c.tp + c.fn),
        "specificity": ratio(c.tn, c.fp + c.tn),
        "false_positive_rate": ratio(c.fp, c.fp + c.tn),
    }


@dataclass
class RocCurve:
    points: list[tuple[float, float]]  # (fpr, tpr) from (0,0) to (1,1)
    auc: float
    thresholds: list[float]


def roc(scored: list[tuple[float, int]]) -> RocCurve:
    """Full threshold sweep over the distinct scores, AUC by trapezoid.

    Equal scores move together so the curve is exact; ties contribute half,
    matching the pairwise-comparison statistic.
    """
    y = np.array([int(lbl) for _, lbl in scored])
    s = np.array([float(sc) for sc, _ in scored])
    pos = int(y.sum())
    neg = len(y) - pos
    if pos == 0 or neg == 0:
        raise UndefinedMetricError("AUC undefined: need both classes present")

    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    points = [(0.0, 0.0)]
    thresholds = [float("inf")]
    tp = fp = 0
    i = 0
    auc = 0.0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            j += 1
        tp += int(y[i:j].sum())
        fp += (j - i) - int(y[i:j].sum())
        x, yy = fp / neg, tp / pos
        auc += (x - points[-1][0]) * (yy + points[-1][1]) / 2.0
        points.append((x, yy))
        thresholds.append(float(s[i]))
        i = j
    return RocCurve(points=points, auc=float(auc), thresholds=thresholds)


def pairwise_auc(scored: list[tuple[float, int]]) -> float:
    """Probability a random positive outscores a random negative, ties counting half."""
    pos = [sc for sc, lbl in scored if lbl == 1]
    neg = [sc for sc, lbl in scored if lbl == 0]
    if not pos or not neg:
        raise UndefinedMetricError("AUC undefined: need both classes present")
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


# ---------------------------------------------------------------------------
# Protocols
# ---------------------------------------------------------------------------


@dataclass
class CaseStats:
    n_train_images: int
    min_accuracy: float
    avg_accuracy: float
    max_accuracy: float
    fp_pct: float  # mean share of evaluated contours that were false positives
    fn_pct: float

    def as_row(self) -> list:
        return [
            self.n_train_images,
            repr(self.min_accuracy),
            repr(self.avg_accuracy),
            repr(self.max_accuracy),
            repr(self.fp_pct),
            repr(self.fn_pct),
        ]


@dataclass
class CaseReport:
    scheme: str
    cases: list[CaseStats]
    auc: float
    roc_points: list[tuple[float, float]]
    overall_avg_accuracy: float
    n_test_contours: int
    n_test_fractured: int

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "overall_avg_accuracy": self.overall_avg_accuracy,
            "auc": self.auc,
            "n_test_contours": self.n_test_contours,
            "n_test_fractured": self.n_test_fractured,
            "cases": [
                {
                    "n_train_images": c.n_train_images,
                    "min_accuracy": c.min_accuracy,
                    "avg_accuracy": c.avg_accuracy,
                    "max_accuracy": c.max_accuracy,
                    "fp_pct": c.fp_pct,
                    "fn_pct": c.fn_pct,
                }
                for c in self.cases
            ],
        }


def split_vectors(split: DatasetSplit) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, FeatureNormalizer]:
    """Vectorize a split; normalization statistics come from the training side only."""
    normalizer = FeatureNormalizer().fit([r.features for r in split.train])
    X_tr = np.array([to_vector(r.features, normalizer) for r in split.train])
    y_tr = np.array([r.label for r in split.train], dtype=np.float64)
    X_te = np.array([to_vector(r.features, normalizer) for r in split.test])
    y_te = np.array([r.label for r in split.test], dtype=np.float64)
    return X_tr, y_tr, X_te, y_te, normalizer


def _child_seed(master_seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([master_seed, *key]).generate_state(1)[0])


def _train_and_score(split: DatasetSplit, cfg: ann.TrainConfig) -> tuple[np.ndarray, np.ndarray]:
    X_tr, y_tr, X_te, y_te, _ = split_vectors(split)
    model = ann.init_model(cfg)
    model = ann.train(model, X_tr, y_tr, cfg)
    return ann.forward_batch(model, X_te), y_te


def run_system_eval(
    rows: list[LabelledContour],
    train_pool: list[str],
    test_pool: list[str],
    train_cfg: ann.TrainConfig,
    scheme: str = "standard",
    n_cases: int = 20,
    n_sims: int = 10,
    master_seed: int = 0,
    threshold: float = 0.5,
) -> CaseReport:
    """Case k trains on k random pool images, repeated over seeded simulations.

    Accuracy statistics are per case; the ROC pools every simulation's test
    scores.  The improved scheme sees no flesh contours on either side.
    """
    if not rows:
        raise InsufficientDataError("no labelled contours available")
    if n_cases > len(train_pool):
        raise InsufficientDataError(f"{n_cases} cases need {n_cases} pool images, have {len(train_pool)}")

    cases = []
    pooled_scores: list[tuple[float, int]] = []
    all_accuracies = []
    test_rows = [r for r in scheme_rows(rows, scheme) if r.image_id in set(test_pool)]
    n_test_fractured = sum(r.label for r in test_rows)

    for case in range(1, n_cases + 1):
        accs, fps, fns = [], [], []
        for sim in range(n_sims):
            seed = _child_seed(master_seed, case, sim)
            split = split_system_eval(rows, train_pool, test_pool, case, seed, scheme)
            if not split.train or not split.test:
                raise InsufficientDataError(f"empty split for case {case} sim {sim}")
            cfg = ann.TrainConfig(**{**train_cfg.__dict__, "seed": seed})
            scores, y_te = _train_and_score(split, cfg)
            preds = scores >= threshold
            counts = ConfusionCounts.from_predictions(preds, y_te)
            accs.append(metrics(counts)["accuracy"])
            fps.append(100.0 * counts.fp / counts.total)
            fns.append(100.0 * counts.fn / counts.total)
            pooled_scores.extend((float(s), int(t)) for s, t in zip(scores, y_te))
        cases.append(
            CaseStats(
                n_train_images=case,
                min_accuracy=min(accs),
                avg_accuracy=float(np.mean(accs)),
                max_accuracy=max(accs),
                fp_pct=float(np.mean(fps)),
                fn_pct=float(np.mean(fns)),
            )
        )
        all_accuracies.extend(accs)

    curve = roc(pooled_scores)
    return CaseReport(
        scheme=scheme,
        cases=cases,
        auc=curve.auc,
        roc_points=curve.points,
        overall_avg_accuracy=float(np.mean(all_accuracies)),
        n_test_contours=len(test_rows),
        n_test_fractured=int(n_test_fractured),
    )


@dataclass
class AnnEvalSeries:
    scheme: str
    entries: list[tuple[int, float]]  # (per-class training count, accuracy)
    truncated_at: int | None = None


def run_ann_eval(
    rows: list[LabelledContour],
    train_pool: list[str],
    test_pool: list[str],
    train_cfg: ann.TrainConfig,
    scheme: str = "standard",
    max_per_class: int = 375,
    step: int = 5,
    master_seed: int = 0,
    threshold: float = 0.5,
) -> AnnEvalSeries:
    """Accuracy versus balanced training-set size, in steps of ``step`` per class."""
    usable = scheme_rows(rows, scheme)
    pool_ids = set(train_pool)
    test_ids = set(test_pool)
    candidates = [r for r in usable if r.image_id in pool_ids]
    test_rows = [r for r in usable if r.image_id in test_ids]
    n_fractured = sum(r.label for r in candidates)
    n_healthy = len(candidates) - n_fractured

    entries = []
    truncated_at = None
    for per_class in range(step, max_per_class + 1, step):
        if per_class > n_fractured or per_class > n_healthy:
            truncated_at = per_class
            warnings.warn(
                f"ann-eval truncated at per_class={per_class}: have {n_fractured} fractured / {n_healthy} non-fractured"
            )
            break
        seed = _child_seed(master_seed, per_class)
        split = split_ann_eval(candidates, test_rows, per_class, seed)
        cfg = ann.TrainConfig(**{**train_cfg.__dict__, "seed": seed})
        scores, y_te = _train_and_score(split, cfg)
        counts = ConfusionCounts.from_predictions(scores >= threshold, y_te)
        entries.append((per_class, metrics(counts)["accuracy"]))
    return AnnEvalSeries(scheme=scheme, entries=entries, truncated_at=truncated_at)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def case_report_to_csv(report: CaseReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n_train_images", "min_accuracy", "avg_accuracy", "max_accuracy", "fp_pct", "fn_pct"]
        )
        for case in report.cases:
            writer.writerow(case.as_row())


def roc_to_csv(points: list[tuple[float, float]], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr"])
        for x, y in points:
            writer.writerow([repr(float(x)), repr(float(y))])


def ann_series_to_csv(series: AnnEvalSeries, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["per_class", "train_size", "accuracy"])
        for per_class, acc in series.entries:
            writer.writerow([per_class, 2 * per_class, repr(float(acc))])


def save_report_json(report: CaseReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2))
