"""Feature correlation and principal-component contribution analysis.

Both operate on the 19 raw feature columns.  Columns are standardized to zero
mean and unit variance first — the features mix pixel counts, degrees and
coordinates, and unscaled analysis would be dominated by whichever unit is
largest.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError
from .features import FEATURE_NAMES, ContourFeatures


@dataclass
class CorrelationMatrix:
    matrix: np.ndarray  # (19, 19)
    names: tuple[str, ...]
    constant_columns: list[int]


@dataclass
class PcaReport:
    loadings: np.ndarray  # (19, 19), column k is component k
    explained_variance_ratio: np.ndarray  # descending
    contributions: np.ndarray  # |loading| on the first component, per feature
    names: tuple[str, ...]
    label_filter: str
    n_rows: int

    def ranked_features(self) -> list[tuple[str, float]]:
        order = np.argsort(-self.contributions)
        return [(self.names[i], float(self.contributions[i])) for i in order]


def _feature_matrix(rows: Sequence[ContourFeatures] | np.ndarray) -> np.ndarray:
    if isinstance(rows, np.ndarray):
        return np.asarray(rows, dtype=np.float64)
    return np.array([r.raw_values() for r in rows], dtype=np.float64)


def correlate(rows: Sequence[ContourFeatures] | np.ndarray) -> CorrelationMatrix:
    """Pairwise Pearson correlation; constant columns correlate 0 with everything."""
    X = _feature_matrix(rows)
    if len(X) < 3:
        raise InsufficientDataError(f"correlation needs at least 3 rows, got {len(X)}")
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    constant = np.nonzero(sigma == 0)[0].tolist()
    if constant:
        warnings.warn(f"constant feature columns in correlation: {[FEATURE_NAMES[i] for i in constant]}")
    safe_sigma = np.where(sigma > 0, sigma, 1.0)
    Z = (X - mu) / safe_sigma
    corr = (Z.T @ Z) / len(X)
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    np.fill_diagonal(corr, 1.0)
    corr = np.clip(corr, -1.0, 1.0)
    return CorrelationMatrix(matrix=corr, names=FEATURE_NAMES, constant_columns=constant)


def pca_contributions(
    rows: Sequence[ContourFeatures] | np.ndarray,
    labels: Sequence[int] | None = None,
    label_filter: str = "all",
) -> PcaReport:
    """Eigendecompose the standardized covariance and report PC1 contributions.

    ``label_filter`` of "fractured"/"non-fractured" keeps only matching rows
    (labels are 1 for fractured); "all" uses everything.
    """
    X = _feature_matrix(rows)
    if label_filter != "all":
        if labels is None:
            raise InsufficientDataError("label_filter requires labels")
        want = 1 if label_filter == "fractured" else 0
        X = X[np.asarray(labels) == want]
    if len(X) < 20:
        raise InsufficientDataError(f"PCA needs at least 20 rows after filtering, got {len(X)}")

    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    safe_sigma = np.where(sigma > 0, sigma, 1.0)
    Z = (X - mu) / safe_sigma
    cov = np.cov(Z, rowvar=False)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    total = eigvals.sum()
    if total <= 0:
        raise InsufficientDataError("zero total variance: every feature column is constant")
    # Deterministic sign: the largest-magnitude loading of each component is positive.
    for k in range(eigvecs.shape[1]):
        pivot = np.argmax(np.abs(eigvecs[:, k]))
        if eigvecs[pivot, k] < 0:
            eigvecs[:, k] = -eigvecs[:, k]
    return PcaReport(
        loadings=eigvecs,
        explained_variance_ratio=eigvals / total,
        contributions=np.abs(eigvecs[:, 0]),
        names=FEATURE_NAMES,
        label_filter=label_filter,
        n_rows=len(X),
    )


def correlation_to_csv(corr: CorrelationMatrix, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature"] + list(corr.names))
        for i, name in enumerate(corr.names):
            writer.writerow([name] + [repr(float(v)) for v in corr.matrix[i]])


def correlation_to_dict(corr: CorrelationMatrix) -> dict:
    return {
        "names": list(corr.names),
        "matrix": [[float(v) for v in row] for row in corr.matrix],
        "constant_columns": corr.constant_columns,
    }


def pca_to_csv(report: PcaReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "pc1_contribution"])
        for name, value in zip(report.names, report.contributions):
            writer.writerow([name, repr(float(value))])


def pca_to_dict(report: PcaReport) -> dict:
    return {
        "label_filter": report.label_filter,
        "n_rows": report.n_rows,
        "names": list(report.names),
        "contributions": [float(v) for v in report.contributions],
        "explained_variance_ratio": [float(v) for v in report.explained_variance_ratio],
    }


def save_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc))
