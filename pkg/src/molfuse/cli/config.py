"""Flat key-value run configuration.

One ``key = value`` pair per line, ``#`` comments, typed parsing against
the schema below, unknown keys rejected. Diff-friendly on purpose: a run
is its config file plus a seed.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from ..lmstub.training import TrainSettings
from ..pipeline import ModelDims


class ConfigError(ValueError):
    """Bad key, bad value, or a violated constraint in a run config."""


@dataclass
class RunConfig:
    seed: int = 0
    # encoders
    d1: int = 32
    d2: int = 32
    d3: int = 32
    levels: int = 3
    tau: float = 4.0
    # projector
    proj_width: int = 64
    queries: int = 8
    heads: int = 4
    kernels: int = 16
    spd_clip: int = 8
    p_drop: float = 0.15
    use_relation_bias: bool = True
    use_modality_embeddings: bool = True
    # decoder stub
    lm_blocks: int = 2
    lm_heads: int = 4
    lm_max_seq: int = 128
    lm_warmup_steps: int = 400
    lora_rank: int = 4
    lora_alpha: float = 8.0
    # optimizer
    lr: float = 3e-3
    stage2_lr: float = 1.5e-3
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 0.0
    steps: int = 300
    stage2_steps: int = 800
    batch_size: int = 4
    # paths
    data_path: str = "data/train64.jsonl"
    val_path: str = "data/val16.jsonl"
    gazetteer_path: str = "data/gazetteer.txt"
    checkpoint_dir: str = "runs/checkpoints"
    report_dir: str = "runs/reports"
    # inference
    modalities: str = "1d,2d,3d"

    def validate(self) -> "RunConfig":
        positive = (
            "d1", "d2", "d3", "levels", "proj_width", "queries", "heads", "kernels",
            "spd_clip", "lm_blocks", "lm_heads", "lm_max_seq", "lora_rank",
            "steps", "stage2_steps", "batch_size",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.p_drop < 1.0:
            raise ConfigError(f"p_drop must be in [0, 1), got {self.p_drop}")
        if self.proj_width % self.heads != 0:
            raise ConfigError(f"proj_width {self.proj_width} not divisible by heads {self.heads}")
        if self.proj_width % self.lm_heads != 0:
            raise ConfigError(f"proj_width {self.proj_width} not divisible by lm_heads {self.lm_heads}")
        self.modality_set()
        return self

    def modality_set(self) -> frozenset[str]:
        parts = frozenset(p.strip() for p in self.modalities.split(",") if p.strip())
        unknown = parts - {"1d", "2d", "3d"}
        if unknown:
            raise ConfigError(f"unknown modalities: {sorted(unknown)}")
        if not parts:
            raise ConfigError("modalities must name at least one of 1d, 2d, 3d")
        return parts

    def model_dims(self) -> ModelDims:
        return ModelDims(
            d1=self.d1,
            d2=self.d2,
            d3=self.d3,
            levels=self.levels,
            tau=self.tau,
            proj_width=self.proj_width,
            queries=self.queries,
            heads=self.heads,
            kernels=self.kernels,
            spd_clip=self.spd_clip,
            lm_blocks=self.lm_blocks,
            lm_heads=self.lm_heads,
            lm_max_seq=self.lm_max_seq,
            use_relation_bias=self.use_relation_bias,
            use_modality_embeddings=self.use_modality_embeddings,
        )

    def train_settings(self, stage: int) -> TrainSettings:
        if stage == 0:  # LM warmup
            steps = self.lm_warmup_steps
        elif stage == 1:
            steps = self.steps
        else:
            steps = self.stage2_steps
        return TrainSettings(
            seed=self.seed,
            steps=steps,
            batch_size=self.batch_size,
            lr=self.stage2_lr if stage == 2 else self.lr,
            beta1=self.beta1,
            beta2=self.beta2,
            weight_decay=self.weight_decay,
            p_drop=self.p_drop,
            lora_rank=self.lora_rank,
            lora_alpha=self.lora_alpha,
        )

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    if kind == "bool":
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected {kind}, got {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> RunConfig:
    config = RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(config, key, _parse_value(key, raw))
    return config.validate()


def load_config(path: str | Path) -> RunConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def config_from_dict(data: dict) -> RunConfig:
    config = RunConfig()
    for key, value in data.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(config, key, value)
    return config.validate()
