"""Knee/leg/foot segmentation from the vertical density of 0-degree gradients.

Horizontal structure concentrates in the knee and foot bands, so the rows at
which 0-degree steps occur cluster there.  The knee cut sits just under the
lowest qualifying cluster above 0.2h; the foot cut sits in the first large
empty run between clusters at or below 0.6h.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .contour import RefinedContour, adjacent_gradients
from .imaging import EDGE_ANGLES

REGIONS = ("knee", "leg", "foot")

DEFAULT_KNEE_MIN_CLUSTER_SIZE = 115
DEFAULT_LARGE_GAP_FRAC = 0.08
DEFAULT_SMALL_GAP_FRAC = 0.03


def knee_temp_threshold(h: int) -> float:
    return 0.2 * h


def foot_temp_threshold(h: int) -> float:
    return 0.6 * h


def default_cluster_gap(h: int) -> int:
    """Row gap above which consecutive 0-degree rows belong to different clusters."""
    return max(5, int(round(0.03 * h)))


@dataclass
class GradientDensity:
    """Per-angle row positions of every adjacent-pair gradient in one image."""

    ys_by_angle: dict[int, list[int]] = field(default_factory=lambda: {a: [] for a in EDGE_ANGLES})


@dataclass
class YCluster:
    y_start: int
    y_end: int
    size: int


@dataclass
class RegionThresholds:
    t_knee: int | None
    t_foot: int | None
    h: int

    def __post_init__(self):
        if self.t_knee is not None and self.t_foot is not None:
            if not (0 <= self.t_knee < self.t_foot <= self.h):
                raise ValueError(f"invalid thresholds: t_knee={self.t_knee}, t_foot={self.t_foot}, h={self.h}")


def build_density(contours: list[RefinedContour]) -> GradientDensity:
    """Bucket each adjacent-pair gradient under its angle at the pair's mean row."""
    density = GradientDensity()
    for rc in contours:
        if len(rc.points) < 2:
            continue
        angles = adjacent_gradients(rc)
        ys = rc.points[:, 1]
        mean_ys = (ys[:-1] + ys[1:]) // 2
        for angle, y in zip(angles, mean_ys):
            density.ys_by_angle[int(angle)].append(int(y))
    return density


def cluster_zero_gradient_rows(density: GradientDensity, gap: int) -> list[YCluster]:
    """Split the sorted 0-degree rows into clusters wherever a jump exceeds ``gap``."""
    if gap < 1:
        raise ValueError(f"gap must be >= 1, got {gap}")
    ys = sorted(density.ys_by_angle[0])
    if not ys:
        return []
    clusters = []
    start = prev = ys[0]
    count = 1
    for y in ys[1:]:
        if y - prev > gap:
            clusters.append(YCluster(y_start=start, y_end=prev, size=count))
            start, count = y, 0
        prev = y
        count += 1
    clusters.append(YCluster(y_start=start, y_end=prev, size=count))
    return clusters


def knee_threshold(
    clusters: list[YCluster],
    h: int,
    min_cluster_size: int = DEFAULT_KNEE_MIN_CLUSTER_SIZE,
) -> int | None:
    """Row separating knee from leg, or None when no cluster qualifies.

    The candidate is the lowest cluster lying fully above 0.2h.  A candidate
    smaller than ``min_cluster_size`` occurrences clears the threshold.
    """
    t_temp = knee_temp_threshold(h)
    candidates = [c for c in clusters if c.y_end < t_temp]
    if not candidates:
        return None
    candidate = max(candidates, key=lambda c: c.y_end)
    if candidate.size < min_cluster_size:
        return None
    return candidate.y_end + 1


def foot_threshold(
    clusters: list[YCluster],
    h: int,
    large_gap_frac: float = DEFAULT_LARGE_GAP_FRAC,
    small_gap_frac: float = DEFAULT_SMALL_GAP_FRAC,
) -> int | None:
    """Row separating leg from foot, or None when no qualifying gap exists.

    Inter-cluster gaps are clipped to rows >= 0.6h.  The first clipped gap
    wider than ``large_gap_frac * h`` wins; failing that, the first wider than
    ``small_gap_frac * h``.  The cut lands at the gap midpoint.
    """
    t_temp = foot_temp_threshold(h)
    first_large = None
    first_small = None
    for prev, nxt in zip(clusters, clusters[1:]):
        lo = max(prev.y_end + 1, math.ceil(t_temp))
        hi = nxt.y_start - 1
        size = hi - lo + 1
        if size <= 0:
            continue
        mid = (lo + hi) // 2
        if first_large is None and size > large_gap_frac * h:
            first_large = mid
        if first_small is None and size > small_gap_frac * h:
            first_small = mid
        if first_large is not None:
            break
    return first_large if first_large is not None else first_small


def compute_thresholds(
    density: GradientDensity,
    h: int,
    gap: int | None = None,
    knee_min_cluster_size: int = DEFAULT_KNEE_MIN_CLUSTER_SIZE,
    large_gap_frac: float = DEFAULT_LARGE_GAP_FRAC,
    small_gap_frac: float = DEFAULT_SMALL_GAP_FRAC,
) -> tuple[RegionThresholds, list[YCluster]]:
    gap = default_cluster_gap(h) if gap is None else gap
    clusters = cluster_zero_gradient_rows(density, gap)
    t_knee = knee_threshold(clusters, h, knee_min_cluster_size)
    t_foot = foot_threshold(clusters, h, large_gap_frac, small_gap_frac)
    if t_knee is not None and t_foot is not None and t_knee >= t_foot:
        t_foot = None  # contradictory cuts: trust the knee, drop the foot
    return RegionThresholds(t_knee=t_knee, t_foot=t_foot, h=h), clusters


def assign_region(rc: RefinedContour, t: RegionThresholds) -> str:
    """Region of a refined contour from its endpoint rows: knee, foot, else leg."""
    y_lo = int(min(rc.points[0][1], rc.points[-1][1]))
    y_hi = int(max(rc.points[0][1], rc.points[-1][1]))
    if t.t_knee is not None and y_lo < t.t_knee:
        return "knee"
    if t.t_foot is not None and y_hi > t.t_foot:
        return "foot"
    return "leg"


def thresholds_to_dict(t: RegionThresholds, clusters: list[YCluster]) -> dict:
    return {
        "t_knee": t.t_knee,
        "t_foot": t.t_foot,
        "h": t.h,
        "clusters": [{"y_start": c.y_start, "y_end": c.y_end, "size": c.size} for c in clusters],
    }


def save_regions(t: RegionThresholds, clusters: list[YCluster], path: str | Path) -> None:
    Path(path).write_text(json.dumps(thresholds_to_dict(t, clusters)))
