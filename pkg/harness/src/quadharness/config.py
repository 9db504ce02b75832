"""Harness configuration with CPU-friendly tiny-model defaults."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

LOSS_MODES = ("bcl", "pooled")


class HarnessConfigError(ValueError):
    pass


@dataclass
class HarnessConfig:
    model: str = "tiny"          # "tiny" (random init) or a local checkpoint path
    epochs: int = 20
    batch_size: int = 64
    learning_rate: float = 1e-4
    optimizer: str = "adamw"
    loss_mode: str = "bcl"
    seed: int = 0
    corpus: str | None = None
    out_dir: str = "checkpoint"
    scores_out: str | None = None
    predictions_out: str | None = None
    max_target_len: int = 96
    # tiny-model dimensions; a pretrained checkpoint ignores these
    d_model: int = 96
    d_ff: int = 256
    num_layers: int = 2
    num_heads: int = 4
    d_kv: int = 16

    def validate(self) -> None:
        if self.loss_mode not in LOSS_MODES:
            raise HarnessConfigError(
                f"loss_mode must be one of {LOSS_MODES}, got {self.loss_mode!r}"
            )
        if self.optimizer.lower() != "adamw":
            raise HarnessConfigError(f"unsupported optimizer {self.optimizer!r}")
        if self.epochs < 1 or self.batch_size < 1:
            raise HarnessConfigError("epochs and batch_size must be >= 1")

    @classmethod
    def load(cls, path: str | Path) -> "HarnessConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise HarnessConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def override(self, **kwargs) -> "HarnessConfig":
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return dataclasses.replace(self, **updates)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)
