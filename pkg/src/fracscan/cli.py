"""Command-line entry point.

Subcommands: synth, process, train, eval, analyze, cluster, serve.  All
randomness flows from the master seed; reruns with the same config and seed
produce byte-identical artifacts.  Exit codes: 0 success, 1 partial failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import ann, clustering, evaluation, imaging, pipeline, plots
from .analysis import (
    correlate,
    correlation_to_csv,
    correlation_to_dict,
    pca_contributions,
    pca_to_csv,
    pca_to_dict,
    save_json,
)
from .config import PipelineConfig, load_config
from .contour import adjacent_gradients
from .dataset import (
    LabelStore,
    generate_synthetic,
    random_spec,
    read_manifest,
    write_manifest,
)
from .errors import ConfigError, FracscanError, InsufficientDataError, MissingArtifactError
from .features import to_vector
from .evaluation import split_vectors

log = logging.getLogger("fracscan")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


def _child_seed(master: int, *key) -> int:
    parts = [master] + [zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in key]
    return int(np.random.SeedSequence(parts).generate_state(1)[0])


def cmd_synth(cfg: PipelineConfig) -> int:
    out = Path(cfg.out) / "synthetic"
    out.mkdir(parents=True, exist_ok=True)
    n = cfg.synth.n_images
    n_fractured = int(round(cfg.synth.fracture_fraction * n))
    samples = {}
    for i in range(n):
        fractured = i < n_fractured
        image_id = f"synth{i:03d}"
        spec = random_spec(_child_seed(cfg.seed, 1000, i), fractured, cfg.synth.width, cfg.synth.height)
        sample = generate_synthetic(spec)
        imaging.save_image(sample.image, out / f"{image_id}.png")
        (out / f"{image_id}.bands.json").write_text(json.dumps(sample.bands))
        samples[image_id] = sample
    write_manifest(samples, out / "manifest.csv")
    log.info("wrote %d synthetic images to %s", n, out)
    return EXIT_OK


def _process_one(args: tuple) -> tuple[str, "pipeline.ProcessedImage | None", str]:
    image_id, path, params, out_dir = args
    try:
        image = imaging.load_image(path)
        processed = pipeline.process_image(image_id, image, params)
        pipeline.write_artifacts(processed, out_dir)
        return image_id, processed, ""
    except Exception as exc:  # noqa: BLE001 - per-image failures must not kill the batch
        return image_id, None, str(exc)


def _image_paths(cfg: PipelineConfig) -> list[tuple[str, Path]]:
    images_dir = Path(cfg.images_dir) if cfg.images_dir else Path(cfg.out) / "synthetic"
    paths = sorted(list(images_dir.glob("*.png")) + list(images_dir.glob("*.pgm")))
    return [(p.stem, p) for p in paths]


def cmd_process(cfg: PipelineConfig) -> int:
    pairs = _image_paths(cfg)
    if not pairs:
        log.warning("no input images found")
        return EXIT_OK
    jobs = [(image_id, path, cfg.pipeline, cfg.out) for image_id, path in pairs]
    failures = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_process_one, jobs))
    else:
        results = [_process_one(job) for job in jobs]
    for image_id, processed, err in sorted(results, key=lambda r: r[0]):
        if processed is None:
            failures.append(image_id)
            log.error("failed to process %s: %s", image_id, err)
    if failures and len(failures) == len(pairs):
        return EXIT_PARTIAL
    return EXIT_PARTIAL if failures else EXIT_OK


def _load_corpus(cfg: PipelineConfig):
    """Reprocess images and pair contours with manifest labels (deterministic)."""
    manifest_path = Path(cfg.out) / "synthetic" / "manifest.csv"
    if not manifest_path.exists():
        raise MissingArtifactError("synth", f"no manifest at {manifest_path}; run 'fracscan synth' first")
    rects_by_id = read_manifest(manifest_path)
    pairs = _image_paths(cfg)
    if not pairs:
        raise MissingArtifactError("process", "no images found")
    rows = []
    store = LabelStore(Path(cfg.out) / "labels")
    processed_by_id = {}
    for image_id, path in pairs:
        image = imaging.load_image(path)
        processed = pipeline.process_image(image_id, image, cfg.pipeline)
        processed_by_id[image_id] = processed
        image_rows, labels, flesh = pipeline.image_rows(
            processed,
            rects_by_id.get(image_id, []),
            bone_band_frac=cfg.pipeline.bone_band_frac,
            flesh_window_frac=cfg.pipeline.flesh_window_frac,
        )
        rows.extend(image_rows)

        def seed_doc(doc, rects=rects_by_id.get(image_id, []), flesh=flesh, processed=processed):
            if not doc.events:  # only initialize fresh documents
                for rect in rects:
                    doc.add_rect(rect)
            doc.flesh = {i for i, f in enumerate(flesh) if f}
            doc.recompute_labels(processed.contours)

        store.mutate(image_id, seed_doc)

    from .dataset import LABEL_FLESH, LABEL_FRACTURED, LABEL_NON_FRACTURED
    from .features import features_to_csv

    labels = [
        LABEL_FLESH if r.flesh else (LABEL_FRACTURED if r.label else LABEL_NON_FRACTURED) for r in rows
    ]
    features_to_csv([r.features for r in rows], Path(cfg.out) / "features.csv", labels=labels)
    return rows, processed_by_id


def _pools(cfg: PipelineConfig, image_ids: list[str]) -> tuple[list[str], list[str]]:
    """Fixed held-out test images; the rest form the training pool."""
    ids = sorted(image_ids)
    n_test = min(cfg.eval.n_test_images, max(1, len(ids) - cfg.eval.n_cases))
    rng = np.random.default_rng(_child_seed(cfg.seed, 7))
    test = sorted(rng.choice(ids, size=n_test, replace=False).tolist())
    train = [i for i in ids if i not in set(test)]
    return train, test


def cmd_train(cfg: PipelineConfig) -> int:
    rows, _ = _load_corpus(cfg)
    train_pool, test_pool = _pools(cfg, sorted({r.image_id for r in rows}))
    from .dataset import split_system_eval

    split = split_system_eval(rows, train_pool, test_pool, len(train_pool), cfg.seed, cfg.eval.scheme)
    X_tr, y_tr, _, _, normalizer = split_vectors(split)
    train_cfg = ann.TrainConfig(**{**cfg.train.__dict__, "seed": cfg.seed})
    model = ann.init_model(train_cfg)
    model = ann.train(model, X_tr, y_tr, train_cfg)
    model.normalizer = normalizer
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    ann.save_model(model, out / "model.json")
    log.info("trained on %d contours; model written to %s", len(y_tr), out / "model.json")
    return EXIT_OK


def cmd_eval(cfg: PipelineConfig) -> int:
    rows, _ = _load_corpus(cfg)
    train_pool, test_pool = _pools(cfg, sorted({r.image_id for r in rows}))
    reports_dir = Path(cfg.out) / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    schemes = ["standard", "improved"] if cfg.eval.scheme == "improved" else ["standard"]
    for scheme in schemes:
        report = evaluation.run_system_eval(
            rows,
            train_pool,
            test_pool,
            cfg.train,
            scheme=scheme,
            n_cases=cfg.eval.n_cases,
            n_sims=cfg.eval.n_sims,
            master_seed=cfg.seed,
            threshold=cfg.eval.threshold,
        )
        evaluation.case_report_to_csv(report, reports_dir / f"system_{scheme}.csv")
        evaluation.save_report_json(report, reports_dir / f"system_{scheme}.json")
        evaluation.roc_to_csv(report.roc_points, reports_dir / f"roc_{scheme}.csv")
        plots.case_accuracy_figure(report, reports_dir / f"system_{scheme}.svg")
        plots.fp_fn_histogram(report, reports_dir / f"fp_fn_{scheme}.svg")
        plots.roc_figure(report.roc_points, report.auc, scheme, reports_dir / f"roc_{scheme}.svg")
        series = evaluation.run_ann_eval(
            rows,
            train_pool,
            test_pool,
            cfg.train,
            scheme=scheme,
            max_per_class=cfg.eval.ann_max_per_class,
            step=cfg.eval.ann_step,
            master_seed=cfg.seed,
            threshold=cfg.eval.threshold,
        )
        evaluation.ann_series_to_csv(series, reports_dir / f"ann_{scheme}.csv")
        plots.ann_series_figure(series, reports_dir / f"ann_{scheme}.svg")
        log.info("scheme %s: avg accuracy %.4f, AUC %.4f", scheme, report.overall_avg_accuracy, report.auc)
    return EXIT_OK


def cmd_analyze(cfg: PipelineConfig) -> int:
    rows, _ = _load_corpus(cfg)
    reports_dir = Path(cfg.out) / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    feats = [r.features for r in rows]
    labels = [r.label for r in rows]
    corr = correlate(feats)
    correlation_to_csv(corr, reports_dir / "correlation.csv")
    save_json(correlation_to_dict(corr), reports_dir / "correlation.json")
    plots.correlation_heatmap(corr, reports_dir / "correlation.svg")
    for label_filter in ("all", "fractured", "non-fractured"):
        try:
            report = pca_contributions(feats, labels, label_filter)
        except InsufficientDataError as exc:
            log.warning("PCA %s skipped: %s", label_filter, exc)
            continue
        stem = f"pca_{label_filter.replace('-', '_')}"
        pca_to_csv(report, reports_dir / f"{stem}.csv")
        save_json(pca_to_dict(report), reports_dir / f"{stem}.json")
        plots.pca_contributions_figure(report, reports_dir / f"{stem}.svg")
    return EXIT_OK


def cmd_cluster(cfg: PipelineConfig) -> int:
    rows, processed_by_id = _load_corpus(cfg)
    model_path = Path(cfg.out) / "model.json"
    model = ann.load_model(model_path) if model_path.exists() else None
    dendro_dir = Path(cfg.out) / "dendrograms"
    dendro_dir.mkdir(parents=True, exist_ok=True)
    label_by_key = {(r.image_id, r.contour_id): r.label for r in rows}
    n_written = 0
    for image_id, processed in sorted(processed_by_id.items()):
        points = []
        for cid, rc in enumerate(processed.contours):
            if model is not None and model.normalizer is not None:
                vec = to_vector(processed.features[cid], model.normalizer)
                fractured = ann.forward(model, vec) >= model.threshold
            else:
                fractured = label_by_key.get((image_id, cid), 0) == 1
            if not fractured or len(rc.points) < 2:
                continue
            angles = adjacent_gradients(rc)
            points.extend(clustering.zero_gradient_midpoints(rc.points, angles).tolist())
        doc = {"image_id": image_id, "leaves": [], "merges": []}
        if len(points) >= 2:
            dendro = clustering.build_dendrogram(points)
            doc = {"image_id": image_id, **clustering.dendrogram_to_dict(dendro)}
            doc["auto_cut"] = clustering.cut_to_dict(clustering.auto_cut(dendro))
        elif points:
            doc["leaves"] = [list(p) for p in points]
        (dendro_dir / f"{image_id}.json").write_text(json.dumps(doc))
        n_written += 1
    log.info("wrote %d dendrograms", n_written)
    return EXIT_OK


def cmd_serve(cfg: PipelineConfig, port: int, token: str | None) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Path(cfg.out), token=token)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracscan", description="Contour-based long-bone fracture detection")
    parser.add_argument("--config", type=str, default=None, help="TOML config file")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--out", type=str, default=None, help="artifact directory override")
    parser.add_argument("--workers", type=int, default=None, help="parallel workers for process")
    parser.add_argument("--scheme", choices=["standard", "improved"], default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", help="generate the synthetic corpus")
    sub.add_parser("process", help="run the image pipeline and write artifacts")
    sub.add_parser("train", help="train a classifier on the corpus")
    sub.add_parser("eval", help="run the system and classifier evaluations")
    sub.add_parser("analyze", help="feature correlation and PCA reports")
    sub.add_parser("cluster", help="build fracture-region dendrograms")
    serve = sub.add_parser("serve", help="run the annotation service")
    serve.add_argument("--port", type=int, default=8471)
    serve.add_argument("--token", type=str, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out = args.out
        if args.workers is not None:
            cfg.workers = args.workers
        if args.scheme is not None:
            cfg.eval.scheme = args.scheme
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG

    try:
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "process":
            return cmd_process(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "eval":
            return cmd_eval(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "cluster":
            return cmd_cluster(cfg)
        if args.command == "serve":
            return cmd_serve(cfg, args.port, args.token)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except FracscanError as exc:
        log.error("%s", exc)
        return EXIT_PARTIAL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
