"""Contour tracing and refinement.

Closed contours are traced around each 8-connected component of the edge map
with Moore border following, so a thin edge object is walked down one side and
back up the other.  Refinement removes that duplicated return half: distances
from the starting point rise to a maximum and fall again, and the first cheap
turning point tells us where the return path begins.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ContourTooSmallError, ContractViolationError

# Moore neighbourhood in clockwise order for image coordinates (y down),
# starting east: E, SE, S, SW, W, NW, N, NE.
_OFFSETS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_OFFSET_INDEX = {off: i for i, off in enumerate(_OFFSETS)}

DEFAULT_MIN_CONTOUR_POINTS = 8


@dataclass
class Contour:
    """Closed traversal of one edge component; points are (x, y) pixel pairs."""

    points: np.ndarray  # (m, 2) int

    @property
    def m(self) -> int:
        return len(self.points)


@dataclass
class RefinedContour:
    """Open sub-path ``source.points[i_s..i_e]`` left after removing the return half."""

    source: Contour
    i_s: int
    i_e: int
    i_dmax: int
    points: np.ndarray = field(init=False)

    def __post_init__(self):
        self.points = self.source.points[self.i_s : self.i_e + 1]

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class TurningPointSet:
    """(index, distance) pairs where the distance-from-start changes direction."""

    entries: list[tuple[int, int]]

    def min_entry(self) -> tuple[int, int]:
        best = min(self.entries, key=lambda e: (e[1], e[0]))
        return best


def _trace_component(labels: np.ndarray, label: int, start: tuple[int, int], n_pixels: int) -> np.ndarray:
    """Moore border following from the topmost-leftmost pixel of a component.

    Thin objects are walked down one side and back up the other, so the
    traversal deliberately revisits pixels.  The walk stops when it is about to
    repeat its very first move (re-entering the start pixel and leaving toward
    the same second pixel); a step cap bounds pathological components.
    """
    h, w = labels.shape
    sx, sy = start

    def is_fg(x: int, y: int) -> bool:
        return 0 <= x < w and 0 <= y < h and labels[y, x] == label

    def advance(cx: int, cy: int, b: int) -> tuple[int, int, int] | None:
        for k in range(1, 9):
            d = (b + k) % 8
            dx, dy = _OFFSETS[d]
            if is_fg(cx + dx, cy + dy):
                prev_dir = (b + k - 1) % 8
                bx, by = cx + _OFFSETS[prev_dir][0], cy + _OFFSETS[prev_dir][1]
                nx, ny = cx + dx, cy + dy
                return nx, ny, _OFFSET_INDEX[(bx - nx, by - ny)]
        return None

    # The backtrack starts west of the start pixel, which is background
    # because the start is the first pixel in raster order.
    first = advance(sx, sy, 4)
    if first is None:  # isolated pixel
        return np.array([(sx, sy)], dtype=np.int64)
    second = (first[0], first[1])

    points = [(sx, sy)]
    cx, cy, b = first
    cap = 8 * n_pixels + 8
    while len(points) <= cap:
        points.append((cx, cy))
        step = advance(cx, cy, b)
        if step is None:
            break
        if (cx, cy) == (sx, sy) and (step[0], step[1]) == second:
            break
        cx, cy, b = step
    if len(points) > 1 and points[-1] == points[0]:
        points.pop()
    return np.array(points, dtype=np.int64)


def trace_contours(edges: np.ndarray, min_points: int = DEFAULT_MIN_CONTOUR_POINTS) -> list[Contour]:
    """Trace one closed contour per 8-connected edge component.

    Components are visited in raster order of their first pixel, so output
    order is deterministic.  Contours shorter than ``min_points`` are dropped.
    """
    edges = np.asarray(edges, dtype=bool)
    if edges.size == 0 or not edges.any():
        return []
    labels, n = ndimage.label(edges, structure=np.ones((3, 3), dtype=int))
    contours = []
    # First pixel of each label in raster order.
    order = {}
    ys, xs = np.nonzero(edges)
    for y, x in zip(ys, xs):
        lab = labels[y, x]
        if lab not in order:
            order[lab] = (int(x), int(y))
    sizes = np.bincount(labels.ravel())
    for lab in sorted(order, key=lambda k: (order[k][1], order[k][0])):
        pts = _trace_component(labels, lab, order[lab], int(sizes[lab]))
        if len(pts) >= min_points:
            contours.append(Contour(points=pts))
    return contours


def point_distances(c: Contour) -> np.ndarray:
    """Manhattan distance of every later point from the first contour point.

    Returns m-1 values, one per point index 1..m-1.
    """
    if c.m < 2:
        raise ContourTooSmallError(f"need at least 2 points, got {c.m}")
    pts = c.points
    return np.abs(pts[1:, 0] - pts[0, 0]) + np.abs(pts[1:, 1] - pts[0, 1])


def _directional_statuses(d: np.ndarray) -> np.ndarray:
    """+1/-1 status per index 1..len(d)-1; plateaus carry the previous status."""
    diffs = np.sign(np.diff(d))
    statuses = np.empty(len(d), dtype=np.int64)
    statuses[0] = 0  # unused
    prev = 1  # a leading plateau counts as increasing
    for i, s in enumerate(diffs, start=1):
        prev = int(s) if s != 0 else prev
        statuses[i] = prev
    return statuses


def turning_points(c: Contour) -> TurningPointSet:
    """Indices (into c.points) where the distance-from-start reverses direction."""
    d = np.concatenate(([0], point_distances(c)))
    statuses = _directional_statuses(d)
    entries = [(i, int(d[i])) for i in range(2, len(d)) if statuses[i] != statuses[i - 1]]
    return TurningPointSet(entries=entries)


def refine_contour(c: Contour) -> RefinedContour:
    """Cut the duplicated return half out of a closed contour.

    Distances from the start point give a maximum (index ``i_dmax``) and a set
    of turning points.  When the cheapest turning point sits below a quarter of
    the maximum distance, the kept range is ``ceil(i_dmin/2) ..
    ceil((i_dmin+m-1)/2)``; otherwise the contour is kept from the start up to
    ``i_dmax``.
    """
    if c.m < 2:
        raise ContourTooSmallError(f"need at least 2 points, got {c.m}")
    d = np.concatenate(([0], point_distances(c)))
    i_dmax = int(np.argmax(d[1:])) + 1  # smallest index attaining the max
    d_max = int(d[i_dmax])

    tps = turning_points(c)
    if tps.entries:
        i_dmin, d_min = tps.min_entry()
        threshold = 0.25 * d_max
        if d_min < threshold:
            i_s = (i_dmin + 1) // 2
            i_e = (i_dmin + c.m) // 2
            return RefinedContour(source=c, i_s=i_s, i_e=i_e, i_dmax=i_dmax)
    return RefinedContour(source=c, i_s=0, i_e=i_dmax, i_dmax=i_dmax)


def step_angles(points: np.ndarray) -> np.ndarray:
    """Quantized direction of each consecutive step, in {0, 45, 90, 135} degrees.

    Horizontal steps map to 0, vertical to 90, the (+x,+y)/(-x,-y) diagonal to
    45 and the other diagonal to 135 (angles are mod 180).
    """
    pts = np.asarray(points)
    if len(pts) < 2:
        raise ContourTooSmallError("need at least 2 points for step angles")
    steps = np.diff(pts, axis=0)
    if np.abs(steps).max(initial=0) > 1 or (steps == 0).all(axis=1).any():
        raise ContractViolationError("consecutive points must be 8-connected (Chebyshev distance 1)")
    dx, dy = steps[:, 0], steps[:, 1]
    angles = np.empty(len(steps), dtype=np.int64)
    angles[dy == 0] = 0
    angles[dx == 0] = 90
    diag = (dx != 0) & (dy != 0)
    angles[diag & (dx == dy)] = 45
    angles[diag & (dx != dy)] = 135
    return angles


def adjacent_gradients(rc: RefinedContour) -> np.ndarray:
    """Step angles along a refined contour (length = point count - 1)."""
    return step_angles(rc.points)


def contour_to_dict(contour_id: int, rc: RefinedContour) -> dict:
    return {
        "id": int(contour_id),
        "points": rc.source.points.tolist(),
        "refined": {"i_s": int(rc.i_s), "i_e": int(rc.i_e)},
    }


def contours_to_json(refined: list[RefinedContour], path: str | Path) -> None:
    docs = [contour_to_dict(i, rc) for i, rc in enumerate(refined)]
    Path(path).write_text(json.dumps(docs))


def contours_to_csv(refined: list[RefinedContour], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["contour_id", "idx", "x", "y"])
        for cid, rc in enumerate(refined):
            for idx, (x, y) in enumerate(rc.source.points):
                writer.writerow([cid, idx, int(x), int(y)])
