import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fracscan import ann
from fracscan.dataset import generate_synthetic, random_spec
from fracscan.imaging import EnhancementConfig
from fracscan.pipeline import PipelineParams, image_rows, process_image

# Frozen configuration for the synthetic corpus: gentle enhancement (the
# renderer already controls contrast), Canny thresholds tuned to catch the
# low-contrast flesh lines, and a bone band sized to the rendered geometry.
SYNTH_ENHANCEMENT = dict(
    gamma=1.0,
    denoise_window=3,
    unsharp_amount=0.0,
    crop_threshold=256.0,
    equalize=False,
    canny_low=30.0,
    canny_high=90.0,
)
SYNTH_BONE_BAND_FRAC = 0.4
SYNTH_FLESH_WINDOW_FRAC = 0.25
SYNTH_TRAIN = dict(learning_rate=0.5, epochs=600, batch_size=16, h1=24, h2=8, patience=80, val_fraction=0.1)

CORPUS_MASTER_SEED = 1000
CORPUS_SIZE = 60
CORPUS_FRACTURED = 30


def synth_params() -> PipelineParams:
    return PipelineParams(
        enhancement=EnhancementConfig(**SYNTH_ENHANCEMENT),
        bone_band_frac=SYNTH_BONE_BAND_FRAC,
        flesh_window_frac=SYNTH_FLESH_WINDOW_FRAC,
    )


def synth_train_config(seed: int = 0) -> ann.TrainConfig:
    return ann.TrainConfig(seed=seed, **SYNTH_TRAIN)


class Corpus:
    def __init__(self):
        params = synth_params()
        self.samples = {}
        self.processed = {}
        self.rows = []
        self.rows_by_image = {}
        self.labels = {}
        self.flesh = {}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for i in range(CORPUS_SIZE):
                image_id = f"synth{i:03d}"
                spec = random_spec(seed=CORPUS_MASTER_SEED + i, fractured=i < CORPUS_FRACTURED)
                sample = generate_synthetic(spec)
                processed = process_image(image_id, sample.image, params)
                rows, labels, flesh = image_rows(
                    processed,
                    sample.fracture_rects,
                    bone_band_frac=SYNTH_BONE_BAND_FRAC,
                    flesh_window_frac=SYNTH_FLESH_WINDOW_FRAC,
                )
                self.samples[image_id] = sample
                self.processed[image_id] = processed
                self.rows.extend(rows)
                self.rows_by_image[image_id] = rows
                self.labels[image_id] = labels
                self.flesh[image_id] = flesh
        ids = sorted(self.samples)
        rng = np.random.default_rng(7)
        self.test_pool = sorted(rng.choice(ids, size=22, replace=False).tolist())
        self.train_pool = [i for i in ids if i not in set(self.test_pool)]


@pytest.fixture(scope="session")
def corpus() -> Corpus:
    return Corpus()
