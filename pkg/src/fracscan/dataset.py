"""Labelled contour datasets: area labelling, flesh isolation, splits, synthetic images.

Labels come from user-drawn selection rectangles: a contour is fractured when
its refined start or end point falls strictly inside a rectangle, unless it
has been deselected or auto-classified as flesh.  The improved scheme drops
flesh contours from training and test sets entirely.

No real hospital corpus ships with the toolkit, so desk-scale verification
uses a seeded synthetic leg-image generator with ground-truth fracture
rectangles.
"""

from __future__ import annotations

import csv
import json
import threading
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contour import RefinedContour
from .errors import InsufficientDataError, InvalidSelectionError
from .features import ContourFeatures

Rect = tuple[float, float, float, float]  # (x0, y0, x1, y1)

DEFAULT_BONE_BAND_FRAC = 0.6
MIN_CONTOURS_FOR_FLESH = 10

LABEL_FRACTURED = "fractured"
LABEL_NON_FRACTURED = "non-fractured"
LABEL_FLESH = "flesh-auto"


def point_in_rect(x: float, y: float, rect: Rect) -> bool:
    """Strict interior containment; boundary points do not count."""
    x0, y0, x1, y1 = rect
    return x0 < x < x1 and y0 < y < y1


def label_by_area(
    contours: list[RefinedContour],
    rects: list[Rect],
    image_shape: tuple[int, int] | None = None,
) -> list[str]:
    """Fractured iff a refined endpoint lies strictly inside some rectangle."""
    if image_shape is not None:
        h, w = image_shape
        for rect in rects:
            x0, y0, x1, y1 = rect
            if not (0 <= x0 <= x1 <= w and 0 <= y0 <= y1 <= h):
                raise InvalidSelectionError(f"rectangle {rect} outside image bounds {w}x{h}")
    labels = []
    for rc in contours:
        sx, sy = int(rc.points[0][0]), int(rc.points[0][1])
        ex, ey = int(rc.points[-1][0]), int(rc.points[-1][1])
        hit = any(point_in_rect(sx, sy, r) or point_in_rect(ex, ey, r) for r in rects)
        labels.append(LABEL_FRACTURED if hit else LABEL_NON_FRACTURED)
    return labels


def bone_band(
    endpoint_xs: np.ndarray,
    frac: float,
    image_width: int,
    window_frac: float = 0.3,
) -> tuple[float, float]:
    """Densest x-window of width ``window_frac * image_width``, grown to cover ``frac``.

    The window position maximizing the endpoint count wins (leftmost on ties);
    if it holds less than ``frac`` of all endpoints it grows one pixel at a
    time toward whichever side has the nearest uncovered endpoint.
    """
    xs = np.sort(np.asarray(endpoint_xs, dtype=np.float64))
    need = int(np.ceil(frac * len(xs)))
    width = max(1, int(round(window_frac * image_width)))
    best_lo, best_count = 0, -1
    for lo in range(0, max(1, image_width - width + 1)):
        count = int(np.sum((xs >= lo) & (xs <= lo + width)))
        if count > best_count:
            best_lo, best_count = lo, count
    lo, hi = float(best_lo), float(best_lo + width)
    while int(np.sum((xs >= lo) & (xs <= hi))) < need and (lo > xs.min() or hi < xs.max()):
        below = xs[xs < lo]
        above = xs[xs > hi]
        gap_left = lo - below.max() if len(below) else np.inf
        gap_right = above.min() - hi if len(above) else np.inf
        if gap_left <= gap_right:
            lo -= 1.0
        else:
            hi += 1.0
    return lo, hi


def isolate_flesh(
    contours: list[RefinedContour],
    image_width: int,
    bone_band_frac: float = DEFAULT_BONE_BAND_FRAC,
    min_contours: int = MIN_CONTOURS_FOR_FLESH,
    window_frac: float = 0.3,
) -> list[bool]:
    """Flag contours whose endpoints both fall outside the central bone band.

    The band is the densest x-window over the endpoint x-value distribution,
    covering at least ``bone_band_frac`` of the endpoints.  With fewer than
    ``min_contours`` contours the statistics are meaningless and everything is
    kept as bone (with a warning).
    """
    if len(contours) < min_contours:
        if contours:
            warnings.warn(f"flesh isolation skipped: only {len(contours)} leg contours (< {min_contours})")
        return [False] * len(contours)
    xs = np.array([[rc.points[0][0], rc.points[-1][0]] for rc in contours], dtype=np.float64)
    lo, hi = bone_band(xs.ravel(), bone_band_frac, image_width, window_frac)
    out = (xs < lo) | (xs > hi)
    return [bool(both) for both in out.all(axis=1)]


# ---------------------------------------------------------------------------
# Label store
# ---------------------------------------------------------------------------


@dataclass
class LabelDocument:
    """Per-image labelling state with an append-only audit trail."""

    image_id: str
    rects: list[Rect] = field(default_factory=list)
    deselected: set[int] = field(default_factory=set)
    flesh: set[int] = field(default_factory=set)
    labels: dict[int, str] = field(default_factory=dict)
    cut_threshold: float | None = None
    events: list[dict] = field(default_factory=list)
    version: int = 0

    def _log(self, op: str, **payload) -> None:
        self.version += 1
        self.events.append({"seq": self.version, "op": op, **payload})

    def add_rect(self, rect: Rect) -> None:
        self.rects.append(tuple(float(v) for v in rect))
        self._log("add_rect", rect=list(rect))

    def remove_rect(self, index: int) -> None:
        if not (0 <= index < len(self.rects)):
            raise InvalidSelectionError(f"no selection rectangle at index {index}")
        self.rects.pop(index)
        self._log("remove_rect", index=index)

    def deselect(self, contour_id: int) -> None:
        self.deselected.add(int(contour_id))
        self._log("deselect", contour_id=int(contour_id))

    def reselect(self, contour_id: int) -> None:
        self.deselected.discard(int(contour_id))
        self._log("reselect", contour_id=int(contour_id))

    def set_cut(self, threshold: float) -> None:
        self.cut_threshold = float(threshold)
        self._log("set_cut", threshold=float(threshold))

    def recompute_labels(self, contours: list[RefinedContour]) -> dict[int, str]:
        area = label_by_area(contours, self.rects)
        labels = {}
        for cid, base in enumerate(area):
            if cid in self.flesh:
                labels[cid] = LABEL_FLESH
            elif cid in self.deselected:
                labels[cid] = LABEL_NON_FRACTURED
            else:
                labels[cid] = base
        self.labels = labels
        return labels

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "version": self.version,
            "rects": [list(r) for r in self.rects],
            "deselected": sorted(self.deselected),
            "flesh": sorted(self.flesh),
            "labels": {str(k): v for k, v in self.labels.items()},
            "cut_threshold": self.cut_threshold,
            "events": self.events,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LabelDocument":
        return cls(
            image_id=doc["image_id"],
            rects=[tuple(r) for r in doc.get("rects", [])],
            deselected=set(doc.get("deselected", [])),
            flesh=set(doc.get("flesh", [])),
            labels={int(k): v for k, v in doc.get("labels", {}).items()},
            cut_threshold=doc.get("cut_threshold"),
            events=list(doc.get("events", [])),
            version=int(doc.get("version", 0)),
        )


def replay_events(image_id: str, events: list[dict], flesh: set[int] | None = None) -> LabelDocument:
    """Rebuild a document from its audit trail alone."""
    doc = LabelDocument(image_id=image_id, flesh=set(flesh or ()))
    for event in events:
        op = event["op"]
        if op == "add_rect":
            doc.rects.append(tuple(event["rect"]))
        elif op == "remove_rect":
            doc.rects.pop(event["index"])
        elif op == "deselect":
            doc.deselected.add(int(event["contour_id"]))
        elif op == "reselect":
            doc.deselected.discard(int(event["contour_id"]))
        elif op == "set_cut":
            doc.cut_threshold = float(event["threshold"])
        doc.version += 1
        doc.events.append(dict(event))
    return doc


class LabelStore:
    """Directory of per-image label documents behind a single writer lock."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, image_id: str) -> Path:
        return self.root / f"{image_id}.json"

    def load(self, image_id: str) -> LabelDocument:
        path = self._path(image_id)
        if path.exists():
            return LabelDocument.from_dict(json.loads(path.read_text()))
        return LabelDocument(image_id=image_id)

    def save(self, doc: LabelDocument) -> None:
        self._path(doc.image_id).write_text(json.dumps(doc.to_dict()))

    def mutate(self, image_id: str, fn) -> LabelDocument:
        """Apply ``fn(doc)`` under the writer lock and persist the result."""
        with self._lock:
            doc = self.load(image_id)
            fn(doc)
            self.save(doc)
            return doc


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabelledContour:
    image_id: str
    contour_id: int
    features: ContourFeatures
    label: int  # 1 fractured, 0 non-fractured (area labelling)
    flesh: bool


@dataclass
class DatasetSplit:
    train: list[LabelledContour]
    test: list[LabelledContour]
    protocol: str
    seed: int
    train_images: tuple[str, ...] = ()


def scheme_rows(rows: list[LabelledContour], scheme: str) -> list[LabelledContour]:
    """Standard keeps every contour; improved drops the flesh contours."""
    if scheme == "improved":
        return [r for r in rows if not r.flesh]
    return list(rows)


def split_system_eval(
    rows: list[LabelledContour],
    train_pool: list[str],
    test_pool: list[str],
    n_train_images: int,
    seed: int,
    scheme: str = "standard",
) -> DatasetSplit:
    """Image-granularity split: sample whole training images, test on a fixed pool."""
    if n_train_images > len(train_pool):
        raise InsufficientDataError(f"asked for {n_train_images} training images, pool has {len(train_pool)}")
    rng = np.random.default_rng(seed)
    chosen = tuple(sorted(rng.choice(sorted(train_pool), size=n_train_images, replace=False).tolist()))
    usable = scheme_rows(rows, scheme)
    train = [r for r in usable if r.image_id in chosen]
    test_ids = set(test_pool)
    test = [r for r in usable if r.image_id in test_ids]
    return DatasetSplit(train=train, test=test, protocol="system-eval", seed=seed, train_images=chosen)


def split_ann_eval(
    rows: list[LabelledContour],
    test_rows: list[LabelledContour],
    per_class: int,
    seed: int,
) -> DatasetSplit:
    """Balanced contour-level split: per_class fractured + per_class non-fractured."""
    if per_class < 1:
        raise InsufficientDataError(f"per_class must be >= 1, got {per_class}")
    fractured = [r for r in rows if r.label == 1]
    healthy = [r for r in rows if r.label == 0]
    if len(fractured) < per_class or len(healthy) < per_class:
        raise InsufficientDataError(
            f"need {per_class} of each class, have {len(fractured)} fractured / {len(healthy)} non-fractured"
        )
    rng = np.random.default_rng(seed)
    pick_f = rng.choice(len(fractured), size=per_class, replace=False)
    pick_h = rng.choice(len(healthy), size=per_class, replace=False)
    train = [fractured[i] for i in sorted(pick_f)] + [healthy[i] for i in sorted(pick_h)]
    return DatasetSplit(train=train, test=list(test_rows), protocol="ann-eval", seed=seed)


# ---------------------------------------------------------------------------
# Synthetic leg images
# ---------------------------------------------------------------------------


@dataclass
class SyntheticSpec:
    """Geometry of one synthetic leg image; every value derives from the seed."""

    width: int = 320
    height: int = 512
    bone_cx: float = 160.0
    bone_half_width: float = 26.0
    bone_slant: float = 0.0
    bone_top: int = 104
    bone_bottom: int = 400
    wobble_amp: float = 4.0
    wobble_period: float = 12.0
    fracture_y: int | None = None
    fracture_gap: int = 10
    flesh_left_x: int = 16
    flesh_right_x: int = 304
    noise_sigma: float = 3.0
    seed: int = 0

    def validate(self) -> None:
        if self.fracture_y is not None:
            if not (self.bone_top < self.fracture_y and self.fracture_y + self.fracture_gap < self.bone_bottom):
                raise InvalidSelectionError("fracture gap must lie within the leg (bone) extent")


@dataclass
class SyntheticSample:
    image: np.ndarray  # (h, w) uint8
    fracture_rects: list[Rect]
    bands: dict[str, tuple[int, int]]
    spec: SyntheticSpec


# Flat intensities for the synthetic scene; contrast against BG drives Canny.
_BG = 40
_BONE = 205
_FLESH_LINE = 110
_BAR = 190
_MARK = 130
_CHIP = 165
_BLOB = 120
_GAP_FILL = _BG  # the gap must break the silhouette, not redraw it


def random_spec(seed: int, fractured: bool, width: int = 320, height: int = 512) -> SyntheticSpec:
    rng = np.random.default_rng(seed)
    spec = SyntheticSpec(
        width=width,
        height=height,
        bone_cx=float(width / 2 + rng.uniform(-10, 10)),
        bone_half_width=float(rng.uniform(24, 26)),
        bone_slant=float(rng.uniform(-0.03, 0.03)),
        bone_top=int(rng.integers(110, 117)),
        bone_bottom=int(rng.integers(394, 404)),
        wobble_amp=float(rng.uniform(2.5, 3.5)),
        wobble_period=float(rng.uniform(10.0, 12.0)),
        fracture_y=int(rng.integers(226, 281)) if fractured else None,
        fracture_gap=int(rng.integers(9, 13)),
        flesh_left_x=int(rng.integers(12, 21)),
        flesh_right_x=int(width - 1 - rng.integers(12, 21)),
        noise_sigma=float(rng.uniform(2.0, 4.0)),
        seed=seed,
    )
    spec.validate()
    return spec


def _bone_edges(spec: SyntheticSpec, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    center = spec.bone_cx + spec.bone_slant * (y - spec.height / 2)
    wobble = spec.wobble_amp * np.sin(2 * np.pi * y / spec.wobble_period)
    left = np.round(center - spec.bone_half_width + wobble).astype(int)
    right = np.round(center + spec.bone_half_width + wobble).astype(int)
    return left, right


def _fill_rows(img: np.ndarray, y0: int, y1: int, x0, x1, value: int) -> None:
    ys = np.arange(max(0, y0), min(img.shape[0], y1 + 1))
    x0s = np.broadcast_to(np.asarray(x0), ys.shape) if np.ndim(x0) == 0 else np.asarray(x0)
    x1s = np.broadcast_to(np.asarray(x1), ys.shape) if np.ndim(x1) == 0 else np.asarray(x1)
    for y, a, b in zip(ys, x0s, x1s):
        img[y, max(0, int(a)) : min(img.shape[1], int(b) + 1)] = value


def generate_synthetic(spec: SyntheticSpec) -> SyntheticSample:
    """Render a limb-like image with ground-truth fracture rectangles.

    The scene: horizontal-bar-rich knee and foot bands, a bright wobbly-edged
    bone shaft with a darker medullary line and two marks, low-contrast flesh
    lines near the borders, a few soft-tissue blobs, and (optionally) a
    transverse fracture gap with bone chips inside it plus one blob next to the
    gap that a ground-truth selection rectangle will sweep up.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    h, w = spec.height, spec.width
    img = np.full((h, w), _BG, dtype=np.float64)

    bar_x0, bar_x1 = int(0.13 * w), int(0.85 * w)
    knee_bars = [(30, 42), (54, 66)]
    foot_bars = [(460, 472), (484, 496)]
    for y0, y1 in knee_bars + foot_bars:
        _fill_rows(img, y0, y1, bar_x0, bar_x1, _BAR)

    ys = np.arange(spec.bone_top, spec.bone_bottom + 1)
    left, right = _bone_edges(spec, ys)
    _fill_rows(img, spec.bone_top, spec.bone_bottom, left, right, _BONE)

    def centerline(rows: np.ndarray) -> np.ndarray:
        return (
            spec.bone_cx
            + spec.bone_slant * (rows - h / 2)
            + spec.wobble_amp * np.sin(2 * np.pi * rows / spec.wobble_period)
        )

    # Four small trabecular marks on the shaft interior, clear of the
    # medullary stripe (which swings with the wobble across the mark's rows)
    # and of the fracture band.
    for my in (int(0.33 * h), int(0.36 * h), int(0.64 * h), int(0.71 * h)):
        my += int(rng.integers(-3, 4))
        mark_rows = np.arange(my, my + 5)
        mx = int(round(float(centerline(mark_rows).max()))) + 7
        img[my : my + 5, mx : mx + 5] = _MARK

    for lx in (spec.flesh_left_x, spec.flesh_right_x):
        jitter_top = spec.bone_top + int(rng.integers(-4, 5))
        jitter_bot = spec.bone_bottom + int(rng.integers(-4, 5))
        img[jitter_top:jitter_bot + 1, lx : lx + 3] = _FLESH_LINE

    # One soft-tissue blob per side.  The clearance to the bone exceeds the
    # flesh-band window slack, and a single blob's two endpoints can never
    # outvote the bone's central mass, so the densest window stays on the bone.
    left_zone = (spec.flesh_left_x + 26, int(spec.bone_cx - spec.bone_half_width) - 45)
    right_zone = (int(spec.bone_cx + spec.bone_half_width) + 45, spec.flesh_right_x - 26)
    blob_rows = np.linspace(spec.bone_top + 55, spec.bone_bottom - 55, 2)
    fracture_band = (
        (spec.fracture_y - 26, spec.fracture_y + spec.fracture_gap + 26) if spec.fracture_y is not None else None
    )
    for i, by in enumerate(blob_rows):
        by = int(by + rng.integers(-6, 7))
        if fracture_band and fracture_band[0] <= by <= fracture_band[1]:
            by = fracture_band[0] - 4 if i % 2 == 0 else fracture_band[1] + 4
        zone = left_zone if i % 2 == 0 else right_zone
        bx = int(rng.integers(zone[0], max(zone[0] + 1, zone[1] - 12)))
        bw, bh = int(rng.integers(9, 14)), int(rng.integers(6, 9))
        img[by : by + bh, bx : bx + bw] = _BLOB

    if spec.fracture_y is None:
        # Healthy legs carry the same kind of mid-shaft soft-tissue blobs that
        # sit next to a fracture in the broken ones, so a blob at that height
        # is not by itself evidence of anything.
        for lo, hi in ((228, 260), (266, 292)):
            tb_x = int(rng.integers(46, 63))
            tb_y = int(rng.integers(lo, hi))
            img[tb_y : tb_y + 6, tb_x : tb_x + 10] = _BLOB

    fracture_rects: list[Rect] = []
    if spec.fracture_y is not None:
        fy, gap = spec.fracture_y, spec.fracture_gap
        gys = np.arange(fy, fy + gap)
        gleft, gright = _bone_edges(spec, gys)
        _fill_rows(img, fy, fy + gap - 1, gleft - 1, gright + 1, _GAP_FILL)

        # Bone chips inside the gap, clear of both cut faces and of the
        # medullary stubs above and below.
        mid = fy + gap // 2
        chip_c = int(round(float(centerline(np.array([mid]))[0])))
        for k in range(2):
            cw = int(rng.integers(4, 6))
            cx = chip_c - 6 if k == 0 else chip_c + 2
            img[mid - 1 : mid + 2, cx : cx + cw] = _CHIP

        # Two soft-tissue blobs beside the gap; the ground-truth rectangle
        # reaches far enough left to sweep them up, mimicking the
        # over-selection a human area label produces.  They sit clear of the
        # bone band so the improved scheme will discard them as flesh.
        nb_hi = max(47, int(spec.bone_cx - spec.bone_half_width) - 52)
        for ny in (fy - int(rng.integers(4, 11)), fy + gap + int(rng.integers(2, 9)) - 6):
            nb_x = int(rng.integers(46, nb_hi))
            img[ny : ny + 6, nb_x : nb_x + 10] = _BLOB

        x0 = 40.0
        x1 = float(min(w - 2, int(gright.max()) + 12))
        y0 = float(max(1, fy - 16))
        y1 = float(min(h - 2, fy + gap + 16))
        fracture_rects.append((x0, y0, x1, y1))

    noise = rng.normal(0.0, spec.noise_sigma, size=img.shape)
    out = np.clip(np.floor(img + noise + 0.5), 0, 255).astype(np.uint8)
    bands = {
        "knee": (knee_bars[0][0], knee_bars[-1][1]),
        "leg": (spec.bone_top, spec.bone_bottom),
        "foot": (foot_bars[0][0], foot_bars[-1][1]),
    }
    return SyntheticSample(image=out, fracture_rects=fracture_rects, bands=bands, spec=spec)


def write_manifest(samples: dict[str, SyntheticSample], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "fractured", "rect_x0", "rect_y0", "rect_x1", "rect_y1", "seed"])
        for image_id in sorted(samples):
            sample = samples[image_id]
            rect = sample.fracture_rects[0] if sample.fracture_rects else ("", "", "", "")
            writer.writerow([image_id, int(bool(sample.fracture_rects)), *rect, sample.spec.seed])


def read_manifest(path: str | Path) -> dict[str, list[Rect]]:
    """image_id -> ground-truth selection rectangles."""
    out: dict[str, list[Rect]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rects = []
            if row["rect_x0"] != "":
                rects.append((float(row["rect_x0"]), float(row["rect_y0"]), float(row["rect_x1"]), float(row["rect_y1"])))
            out[row["image_id"]] = rects
    return out
