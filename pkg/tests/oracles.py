"""Independent reference implementations used as test oracles.

These are deliberately written as plain step-by-step Python, separate from the
library's vectorized code paths, so agreement between the two is meaningful.
"""

from __future__ import annotations

import math


def refine_oracle(points: list[tuple[int, int]]) -> tuple[int, int]:
    """Step-by-step refinement: returns (i_s, i_e) for a closed contour.

    Distances are Manhattan from the first point.  Statuses compare each
    distance with its predecessor (plateaus inherit the previous status, a
    leading plateau counts as increasing).  A turning point is a status change;
    if the smallest turning-point distance is below a quarter of the maximum
    distance the kept range is ceil(i_min/2) .. ceil((i_min + m - 1)/2),
    otherwise 0 .. argmax.
    """
    m = len(points)
    assert m >= 2
    x0, y0 = points[0]
    d = [abs(x - x0) + abs(y - y0) for x, y in points]

    d_max = max(d[1:])
    i_dmax = next(i for i in range(1, m) if d[i] == d_max)

    statuses = {}
    prev = "increasing"
    for i in range(1, m):
        if d[i] > d[i - 1]:
            prev = "increasing"
        elif d[i] < d[i - 1]:
            prev = "decreasing"
        statuses[i] = prev

    turning = [(i, d[i]) for i in range(2, m) if statuses[i] != statuses[i - 1]]
    if turning:
        d_min = min(dist for _, dist in turning)
        i_dmin = next(i for i, dist in turning if dist == d_min)
        if d_min < 0.25 * d_max:
            i_s = math.ceil(i_dmin / 2)
            i_e = math.ceil((i_dmin + (m - 1)) / 2)
            return i_s, i_e
    return 0, i_dmax


def euclid_oracle(p, q) -> float:
    return math.sqrt((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2)


def agglomerate_oracle(points: list[tuple[float, float]]) -> list[tuple[int, int, float]]:
    """Brute-force complete-linkage agglomeration.

    Clusters are explicit leaf-index sets; every step recomputes all pairwise
    linkage distances from scratch.  Ties break toward the pair whose member
    clusters contain the smallest leaf indices.  Ids follow the same scheme as
    the library: leaves 0..n-1, merge i creates id n+i.
    """
    n = len(points)
    clusters: dict[int, list[int]] = {i: [i] for i in range(n)}
    merges = []
    next_id = n
    while len(clusters) > 1:
        best = None
        for a in clusters:
            for b in clusters:
                if a >= b:
                    continue
                linkage = max(
                    euclid_oracle(points[i], points[j]) for i in clusters[a] for j in clusters[b]
                )
                la, lb = min(clusters[a]), min(clusters[b])
                key = (linkage, min(la, lb), max(la, lb))
                if best is None or key < best[0]:
                    best = (key, a, b)
        (linkage, _, _), a, b = best
        lo, hi = (a, b) if min(clusters[a]) < min(clusters[b]) else (b, a)
        merges.append((lo, hi, linkage))
        clusters[next_id] = clusters.pop(lo) + clusters.pop(hi)
        next_id += 1
    return merges


def clusters_at_threshold(points: list[tuple[float, float]], threshold: float) -> list[list[int]]:
    """Re-cluster from scratch: union leaves joined by merges below the threshold."""
    merges = agglomerate_oracle(points)
    n = len(points)
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for k, (a, b, dist) in enumerate(merges):
        if dist < threshold and a in members and b in members:
            members[n + k] = members.pop(a) + members.pop(b)
    return sorted((sorted(v) for v in members.values()), key=lambda c: c[0])


def random_closed_contour(rng, max_m: int = 60) -> list[tuple[int, int]]:
    """Random closed 8-connected walk: wander outward, then step greedily home."""
    steps = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0)]
    out_len = int(rng.integers(3, max(4, max_m // 2)))
    x = y = 0
    points = [(0, 0)]
    for _ in range(out_len):
        dx, dy = steps[int(rng.integers(0, 8))]
        x, y = x + dx, y + dy
        if (x, y) != points[-1]:
            points.append((x, y))
    while max(abs(x), abs(y)) > 1 and len(points) < max_m:
        dx = -1 if x > 0 else (1 if x < 0 else 0)
        dy = -1 if y > 0 else (1 if y < 0 else 0)
        x, y = x + dx, y + dy
        points.append((x, y))
    # Deduplicate accidental consecutive repeats introduced by the walk.
    cleaned = [points[0]]
    for p in points[1:]:
        if p != cleaned[-1]:
            cleaned.append(p)
    if len(cleaned) < 2:
        cleaned.append((1, 0))
    return cleaned


def random_open_path(rng, max_len: int = 80) -> list[tuple[int, int]]:
    """Random open 8-connected path with no consecutive repeats."""
    steps = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0)]
    length = int(rng.integers(2, max_len))
    x, y = int(rng.integers(0, 50)), int(rng.integers(0, 50))
    points = [(x, y)]
    while len(points) < length:
        dx, dy = steps[int(rng.integers(0, 8))]
        x, y = points[-1][0] + dx, points[-1][1] + dy
        points.append((x, y))
    return points
