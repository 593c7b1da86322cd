"""Agglomerative complete-linkage clustering of 0-degree gradient points.

The per-image point counts are small (tens to a few hundred), so the
agglomeration is the naive O(n^3) loop with an explicit deterministic
tie-break: among equal linkage distances the pair whose clusters contain the
smallest leaf indices merges first.  Merge ids follow the scipy convention —
leaves are 0..n-1 and merge i creates cluster n+i.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FracscanError


def euclidean(p, q) -> float:
    return math.sqrt(sum((qi - pi) ** 2 for pi, qi in zip(p, q)))


def complete_linkage(P, Q) -> float:
    """Maximum pairwise distance between two non-empty point sets."""
    if len(P) == 0 or len(Q) == 0:
        raise FracscanError("complete linkage needs non-empty point sets")
    return max(euclidean(p, q) for p in P for q in Q)


@dataclass
class Merge:
    a: int
    b: int
    dist: float


@dataclass
class Dendrogram:
    leaves: np.ndarray  # (n, 2) float points
    merges: list[Merge]

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)


@dataclass
class ClusterCut:
    threshold: float
    clusters: list[list[int]]  # leaf indices, ordered by smallest member
    rects: list[tuple[float, float, float, float]]  # (x0, y0, x1, y1) per cluster


def build_dendrogram(points) -> Dendrogram:
    """Agglomerate singletons by repeatedly merging the closest pair.

    The inter-cluster matrix is kept up to date with the complete-linkage
    max-rule (distance from a merged cluster to any other is the max of its
    parents' distances), which reproduces the brute-force pairwise maximum
    exactly.  Merge distances never decrease; this is asserted on every build.
    """
    leaves = np.asarray(points, dtype=np.float64)
    n = len(leaves)
    if n < 2:
        raise FracscanError(f"need at least 2 points, got {n}")

    size = 2 * n - 1
    dx = leaves[:, 0][:, None] - leaves[:, 0][None, :]
    dy = leaves[:, 1][:, None] - leaves[:, 1][None, :]
    dist = np.full((size, size), np.inf)
    dist[:n, :n] = np.sqrt(dx * dx + dy * dy)
    np.fill_diagonal(dist, np.inf)

    min_leaf = np.full(size, -1, dtype=np.int64)
    min_leaf[:n] = np.arange(n)
    alive = np.zeros(size, dtype=bool)
    alive[:n] = True

    merges: list[Merge] = []
    for step in range(n - 1):
        d = float(dist.min())
        rows, cols = np.nonzero(dist == d)
        best = None
        for i, j in zip(rows, cols):
            if i >= j:
                continue
            la, lb = int(min_leaf[i]), int(min_leaf[j])
            key = (min(la, lb), max(la, lb))
            if best is None or key < best[0]:
                best = (key, int(i), int(j))
        _, ci, cj = best
        a, b = (ci, cj) if min_leaf[ci] < min_leaf[cj] else (cj, ci)
        merges.append(Merge(a=a, b=b, dist=d))

        new = n + step
        merged_row = np.maximum(dist[ci], dist[cj])
        merged_row[~alive] = np.inf
        merged_row[[ci, cj]] = np.inf
        dist[new, :] = merged_row
        dist[:, new] = merged_row
        dist[new, new] = np.inf
        dist[[ci, cj], :] = np.inf
        dist[:, [ci, cj]] = np.inf
        alive[[ci, cj]] = False
        alive[new] = True
        min_leaf[new] = min(min_leaf[ci], min_leaf[cj])

    dists = [m.dist for m in merges]
    if any(d2 < d1 for d1, d2 in zip(dists, dists[1:])):
        raise AssertionError("complete-linkage merge distances must be non-decreasing")
    return Dendrogram(leaves=leaves, merges=merges)


def cut(d: Dendrogram, threshold: float) -> ClusterCut:
    """Partition the leaves by applying every merge with distance < threshold."""
    if threshold < 0:
        raise FracscanError(f"threshold must be >= 0, got {threshold}")
    n = d.n_leaves
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for k, m in enumerate(d.merges):
        if m.dist < threshold and m.a in members and m.b in members:
            members[n + k] = members.pop(m.a) + members.pop(m.b)
    clusters = sorted((sorted(v) for v in members.values()), key=lambda c: c[0])
    rects = []
    for cluster in clusters:
        pts = d.leaves[cluster]
        rects.append((float(pts[:, 0].min()), float(pts[:, 1].min()), float(pts[:, 0].max()), float(pts[:, 1].max())))
    return ClusterCut(threshold=float(threshold), clusters=clusters, rects=rects)


def auto_cut(d: Dendrogram) -> ClusterCut:
    """Cut at the largest relative jump between consecutive merge distances.

    Ties (including the no-distinguished-gap case where all ratios are 1)
    resolve toward fewer clusters.  With fewer than 2 merges the whole tree is
    one cluster.
    """
    dists = [m.dist for m in d.merges]
    if len(dists) < 2:
        return cut(d, dists[-1] + 1.0 if dists else 1.0)
    best_ratio = 1.0
    best_i = None
    for i in range(len(dists) - 1):
        lo, hi = dists[i], dists[i + 1]
        if hi > lo == 0:
            ratio = math.inf
        elif lo == 0:
            ratio = 1.0
        else:
            ratio = hi / lo
        if ratio >= best_ratio:  # >= keeps the latest gap, i.e. fewer clusters
            best_ratio = ratio
            best_i = i
    if best_ratio <= 1.0:
        return cut(d, dists[-1] + 1.0)
    return cut(d, dists[best_i + 1])


def dendrogram_to_dict(d: Dendrogram) -> dict:
    return {
        "leaves": d.leaves.tolist(),
        "merges": [{"a": m.a, "b": m.b, "dist": m.dist} for m in d.merges],
    }


def dendrogram_from_dict(doc: dict) -> Dendrogram:
    return Dendrogram(
        leaves=np.asarray(doc["leaves"], dtype=np.float64),
        merges=[Merge(a=int(m["a"]), b=int(m["b"]), dist=float(m["dist"])) for m in doc["merges"]],
    )


def cut_to_dict(c: ClusterCut) -> dict:
    return {
        "threshold": c.threshold,
        "clusters": [{"leaves": leaves, "rect": list(rect)} for leaves, rect in zip(c.clusters, c.rects)],
    }


def save_dendrogram(d: Dendrogram, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dendrogram_to_dict(d)))


def zero_gradient_midpoints(points: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Midpoints of the adjacent pairs whose quantized step angle is 0 degrees."""
    pts = np.asarray(points, dtype=np.float64)
    mids = (pts[:-1] + pts[1:]) / 2.0
    return mids[np.asarray(angles) == 0]
