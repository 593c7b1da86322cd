"""The 19 per-contour features plus the 3-flag region encoding.

Feature order (CSV header abbreviations):

    N-C, X1, Y1, X2, Y2, DIST-T, G, G-AVG1, G-AVG2, X-MID, Y-MID,
    N-G0, N-G45, N-G90, N-G135,
    N-G0-DIFF, N-G45-DIFF, N-G90-DIFF, N-G135-DIFF

followed by REGION and LABEL columns in CSV exports.  The classifier input is
the 19 features min-max normalized to [0, 1] plus a knee/leg/foot one-hot,
22 values in total.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .contour import RefinedContour, step_angles
from .errors import ContourTooSmallError, UnfittedNormalizerError
from .segmentation import REGIONS

FEATURE_NAMES = (
    "N-C",
    "X1",
    "Y1",
    "X2",
    "Y2",
    "DIST-T",
    "G",
    "G-AVG1",
    "G-AVG2",
    "X-MID",
    "Y-MID",
    "N-G0",
    "N-G45",
    "N-G90",
    "N-G135",
    "N-G0-DIFF",
    "N-G45-DIFF",
    "N-G90-DIFF",
    "N-G135-DIFF",
)

N_FEATURES = len(FEATURE_NAMES)
VECTOR_WIDTH = N_FEATURES + len(REGIONS)

DEFAULT_AVG2_WINDOW = 5


@dataclass
class ContourFeatures:
    n_c: int
    x1: int
    y1: int
    x2: int
    y2: int
    dist_t: float
    grad: float
    g_avg1: float
    g_avg2: float
    x_mid: float
    y_mid: float
    n_g0: int
    n_g45: int
    n_g90: int
    n_g135: int
    n_g0_diff: int
    n_g45_diff: int
    n_g90_diff: int
    n_g135_diff: int
    region: str

    def raw_values(self) -> np.ndarray:
        return np.array(
            [
                self.n_c,
                self.x1,
                self.y1,
                self.x2,
                self.y2,
                self.dist_t,
                self.grad,
                self.g_avg1,
                self.g_avg2,
                self.x_mid,
                self.y_mid,
                self.n_g0,
                self.n_g45,
                self.n_g90,
                self.n_g135,
                self.n_g0_diff,
                self.n_g45_diff,
                self.n_g90_diff,
                self.n_g135_diff,
            ],
            dtype=np.float64,
        )

    def region_one_hot(self) -> np.ndarray:
        return np.array([1.0 if self.region == r else 0.0 for r in REGIONS])


def endpoint_gradient(x1: int, y1: int, x2: int, y2: int) -> float:
    """Angle of the endpoint chord measured from vertical: atan(dx/dy) in degrees.

    A horizontal chord (dy == 0) maps to 90; coincident endpoints map to 0.
    """
    dx, dy = x2 - x1, y2 - y1
    if dx == 0 and dy == 0:
        return 0.0
    if dy == 0:
        return 90.0
    return math.degrees(math.atan(dx / dy))


def _windowed_mean(values: np.ndarray, window: int) -> float:
    """Mean of the means of non-overlapping windows (last partial window kept)."""
    chunks = [values[i : i + window] for i in range(0, len(values), window)]
    return float(np.mean([np.mean(chunk) for chunk in chunks]))


def _fold_difference(diff: np.ndarray) -> np.ndarray:
    # Angles are mod-180 classes, so a raw difference d and 180-d are the same.
    return np.minimum(diff, 180 - diff)


def extract_features(rc: RefinedContour, region: str, avg2_window: int = DEFAULT_AVG2_WINDOW) -> ContourFeatures:
    """Compute the 19 features of a refined contour.

    The path is first oriented so that the endpoint with the smaller x (ties
    broken by smaller y) comes first; all order-dependent quantities are
    computed on that oriented path, making extraction independent of traversal
    direction.
    """
    pts = np.asarray(rc.points, dtype=np.int64)
    if len(pts) < 2:
        raise ContourTooSmallError(f"need at least 2 points, got {len(pts)}")
    first = (int(pts[0, 0]), int(pts[0, 1]))
    last = (int(pts[-1, 0]), int(pts[-1, 1]))
    if last < first:
        pts = pts[::-1]
    x1, y1 = int(pts[0, 0]), int(pts[0, 1])
    x2, y2 = int(pts[-1, 0]), int(pts[-1, 1])

    steps = np.diff(pts, axis=0)
    dist_t = float(np.sum(np.hypot(steps[:, 0], steps[:, 1])))
    angles = step_angles(pts)
    g_avg1 = float(np.mean(angles))
    g_avg2 = _windowed_mean(angles.astype(np.float64), avg2_window)
    mids = (pts[:-1] + pts[1:]) / 2.0
    x_mid = float(np.mean(mids[:, 0]))
    y_mid = float(np.mean(mids[:, 1]))

    counts = {a: int(np.sum(angles == a)) for a in (0, 45, 90, 135)}
    diffs = _fold_difference(np.abs(np.diff(angles)))
    diff_counts = {a: int(np.sum(diffs == a)) for a in (0, 45, 90, 135)}

    return ContourFeatures(
        n_c=len(pts),
        x1=x1,
        y1=y1,
        x2=x2,
        y2=y2,
        dist_t=dist_t,
        grad=endpoint_gradient(x1, y1, x2, y2),
        g_avg1=g_avg1,
        g_avg2=g_avg2,
        x_mid=x_mid,
        y_mid=y_mid,
        n_g0=counts[0],
        n_g45=counts[45],
        n_g90=counts[90],
        n_g135=counts[135],
        n_g0_diff=diff_counts[0],
        n_g45_diff=diff_counts[45],
        n_g90_diff=diff_counts[90],
        n_g135_diff=diff_counts[135],
        region=region,
    )


class FeatureNormalizer:
    """Per-feature min-max statistics fitted on the training split only."""

    def __init__(self, mins: np.ndarray | None = None, maxs: np.ndarray | None = None):
        self.mins = None if mins is None else np.asarray(mins, dtype=np.float64)
        self.maxs = None if maxs is None else np.asarray(maxs, dtype=np.float64)

    @property
    def fitted(self) -> bool:
        return self.mins is not None and self.maxs is not None

    def fit(self, rows: Iterable[ContourFeatures]) -> "FeatureNormalizer":
        matrix = np.array([r.raw_values() for r in rows], dtype=np.float64)
        if matrix.size == 0:
            raise UnfittedNormalizerError("cannot fit a normalizer on zero rows")
        self.mins = matrix.min(axis=0)
        self.maxs = matrix.max(axis=0)
        return self

    def transform_raw(self, raw: np.ndarray, clamp: bool = True) -> np.ndarray:
        if not self.fitted:
            raise UnfittedNormalizerError("normalization statistics missing; fit the normalizer first")
        span = self.maxs - self.mins
        out = np.where(span > 0, (raw - self.mins) / np.where(span > 0, span, 1.0), 0.0)
        return np.clip(out, 0.0, 1.0) if clamp else out

    def inverse(self, normalized: np.ndarray) -> np.ndarray:
        if not self.fitted:
            raise UnfittedNormalizerError("normalization statistics missing; fit the normalizer first")
        span = self.maxs - self.mins
        return self.mins + np.asarray(normalized, dtype=np.float64) * span

    def to_dict(self) -> dict:
        if not self.fitted:
            raise UnfittedNormalizerError("normalization statistics missing; fit the normalizer first")
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureNormalizer":
        return cls(mins=np.array(doc["mins"]), maxs=np.array(doc["maxs"]))


def to_vector(f: ContourFeatures, normalizer: FeatureNormalizer, clamp: bool = True) -> np.ndarray:
    """22-value classifier input: normalized features then [knee, leg, foot] one-hot."""
    return np.concatenate([normalizer.transform_raw(f.raw_values(), clamp=clamp), f.region_one_hot()])


def features_to_csv(
    rows: Sequence[ContourFeatures],
    path: str | Path,
    labels: Sequence[str] | None = None,
) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(FEATURE_NAMES) + ["REGION", "LABEL"])
        for i, f in enumerate(rows):
            label = labels[i] if labels is not None else ""
            writer.writerow(_csv_row(f, label))


def _csv_row(f: ContourFeatures, label: str) -> list:
    vals = [
        f.n_c,
        f.x1,
        f.y1,
        f.x2,
        f.y2,
        f.dist_t,
        f.grad,
        f.g_avg1,
        f.g_avg2,
        f.x_mid,
        f.y_mid,
        f.n_g0,
        f.n_g45,
        f.n_g90,
        f.n_g135,
        f.n_g0_diff,
        f.n_g45_diff,
        f.n_g90_diff,
        f.n_g135_diff,
    ]
    return vals + [f.region, label]
