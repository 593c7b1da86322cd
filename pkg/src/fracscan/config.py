"""TOML pipeline configuration with CLI-flag overrides.

All randomness flows from ``seed``; every tunable lives in one file so a run
is reproducible from the config alone.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ann import TrainConfig
from .errors import ConfigError
from .imaging import EnhancementConfig
from .pipeline import PipelineParams


@dataclass
class EvalConfig:
    scheme: str = "improved"
    n_cases: int = 20
    n_sims: int = 10
    n_test_images: int = 22
    ann_step: int = 5
    ann_max_per_class: int = 375
    threshold: float = 0.5


@dataclass
class SynthConfig:
    n_images: int = 60
    fracture_fraction: float = 0.5
    width: int = 256
    height: int = 512


@dataclass
class PipelineConfig:
    seed: int = 0
    out: str = "out"
    images_dir: str = ""
    workers: int = 1
    enhancement: EnhancementConfig = field(default_factory=EnhancementConfig)
    pipeline: PipelineParams = field(default_factory=PipelineParams)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)

    def __post_init__(self):
        self.pipeline.enhancement = self.enhancement


def _apply_section(obj, section: dict, name: str) -> None:
    known = {f.name for f in fields(obj)}
    for key, value in section.items():
        if key not in known:
            raise ConfigError(f"unknown key '{key}' in [{name}]")
        setattr(obj, key, value)


def load_config(path: str | Path | None) -> PipelineConfig:
    cfg = PipelineConfig()
    if path is None:
        return cfg
    try:
        doc = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for key in ("seed", "out", "images_dir", "workers"):
        if key in doc:
            setattr(cfg, key, doc[key])
    if "enhancement" in doc:
        _apply_section(cfg.enhancement, doc["enhancement"], "enhancement")
    if "pipeline" in doc:
        _apply_section(cfg.pipeline, doc["pipeline"], "pipeline")
    if "train" in doc:
        _apply_section(cfg.train, doc["train"], "train")
    if "eval" in doc:
        _apply_section(cfg.eval, doc["eval"], "eval")
    if "synth" in doc:
        _apply_section(cfg.synth, doc["synth"], "synth")
    cfg.pipeline.enhancement = cfg.enhancement
    if cfg.eval.scheme not in ("standard", "improved"):
        raise ConfigError(f"scheme must be 'standard' or 'improved', got '{cfg.eval.scheme}'")
    return cfg
