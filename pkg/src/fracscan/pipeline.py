"""Per-image processing pipeline and corpus assembly.

One image flows enhance -> edges -> contours -> refine -> segment -> features.
A corpus pairs every processed contour with its area label and flesh flag so
the evaluation protocols can slice it by scheme.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import contour as contour_mod
from . import imaging, segmentation
from .dataset import (
    LabelledContour,
    LABEL_FRACTURED,
    Rect,
    isolate_flesh,
    label_by_area,
)
from .features import ContourFeatures, extract_features, features_to_csv


@dataclass
class ProcessedImage:
    image_id: str
    enhanced: np.ndarray
    edges: np.ndarray
    contours: list[contour_mod.RefinedContour]
    thresholds: segmentation.RegionThresholds
    clusters: list[segmentation.YCluster]
    regions: list[str]
    features: list[ContourFeatures]


@dataclass
class PipelineParams:
    enhancement: imaging.EnhancementConfig = field(default_factory=imaging.EnhancementConfig)
    min_contour_points: int = contour_mod.DEFAULT_MIN_CONTOUR_POINTS
    cluster_gap: int | None = None  # None: max(5, 0.03 h)
    knee_min_cluster_size: int = segmentation.DEFAULT_KNEE_MIN_CLUSTER_SIZE
    large_gap_frac: float = segmentation.DEFAULT_LARGE_GAP_FRAC
    small_gap_frac: float = segmentation.DEFAULT_SMALL_GAP_FRAC
    avg2_window: int = 5
    bone_band_frac: float = 0.6
    flesh_window_frac: float = 0.3


def process_image(image_id: str, image: np.ndarray, params: PipelineParams) -> ProcessedImage:
    enhanced = imaging.enhance(image, params.enhancement)
    edges = imaging.detect_edges(enhanced, params.enhancement)
    traced = contour_mod.trace_contours(edges, min_points=params.min_contour_points)
    refined = [contour_mod.refine_contour(c) for c in traced]
    refined = [rc for rc in refined if len(rc.points) >= 2]
    density = segmentation.build_density(refined)
    thresholds, clusters = segmentation.compute_thresholds(
        density,
        h=enhanced.shape[0],
        gap=params.cluster_gap,
        knee_min_cluster_size=params.knee_min_cluster_size,
        large_gap_frac=params.large_gap_frac,
        small_gap_frac=params.small_gap_frac,
    )
    regions = [segmentation.assign_region(rc, thresholds) for rc in refined]
    feats = [extract_features(rc, region, avg2_window=params.avg2_window) for rc, region in zip(refined, regions)]
    return ProcessedImage(
        image_id=image_id,
        enhanced=enhanced,
        edges=edges,
        contours=refined,
        thresholds=thresholds,
        clusters=clusters,
        regions=regions,
        features=feats,
    )


def image_rows(
    processed: ProcessedImage,
    rects: list[Rect],
    bone_band_frac: float = 0.6,
    flesh_window_frac: float = 0.3,
) -> tuple[list[LabelledContour], list[str], list[bool]]:
    """Area-label one image's contours and flag its leg-region flesh contours."""
    labels = label_by_area(processed.contours, rects, image_shape=processed.enhanced.shape)
    leg_idx = [i for i, region in enumerate(processed.regions) if region == "leg"]
    leg_flesh = isolate_flesh(
        [processed.contours[i] for i in leg_idx],
        image_width=processed.enhanced.shape[1],
        bone_band_frac=bone_band_frac,
        window_frac=flesh_window_frac,
    )
    flesh = [False] * len(processed.contours)
    for i, is_flesh in zip(leg_idx, leg_flesh):
        flesh[i] = is_flesh
    rows = [
        LabelledContour(
            image_id=processed.image_id,
            contour_id=cid,
            features=processed.features[cid],
            label=1 if labels[cid] == LABEL_FRACTURED else 0,
            flesh=flesh[cid],
        )
        for cid in range(len(processed.contours))
    ]
    return rows, labels, flesh


def write_artifacts(processed: ProcessedImage, out_dir: str | Path) -> None:
    """Persist one image's artifacts under images/, edges/, contours/, regions/, features/."""
    out = Path(out_dir)
    for sub in ("images", "edges", "contours", "regions", "features"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    image_id = processed.image_id
    imaging.save_image(processed.enhanced, out / "images" / f"{image_id}.png")
    imaging.edge_map_to_pgm(processed.edges, out / "edges" / f"{image_id}.pgm")
    imaging.save_edge_rle(processed.edges, out / "edges" / f"{image_id}.json")
    contour_mod.contours_to_json(processed.contours, out / "contours" / f"{image_id}.json")
    contour_mod.contours_to_csv(processed.contours, out / "contours" / f"{image_id}.csv")
    segmentation.save_regions(processed.thresholds, processed.clusters, out / "regions" / f"{image_id}.json")
    features_to_csv(processed.features, out / "features" / f"{image_id}.csv")


def load_contours_json(path: str | Path) -> list[contour_mod.RefinedContour]:
    docs = json.loads(Path(path).read_text())
    out = []
    for doc in docs:
        source = contour_mod.Contour(points=np.asarray(doc["points"], dtype=np.int64))
        i_s, i_e = int(doc["refined"]["i_s"]), int(doc["refined"]["i_e"])
        out.append(contour_mod.RefinedContour(source=source, i_s=i_s, i_e=i_e, i_dmax=i_e))
    return out
