"""Run configuration: one structured JSON file, overridable per flag, with
a resolved snapshot written next to every output artifact."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

N_QUAD_ORDERS = 24


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    data: str | None = None
    element_order: str = "acos"
    k: int = 15
    tau: float | None = None
    pps_k: int | None = None
    pps_seed: int = 0
    include_pairwise: bool = True
    include_overall: bool = True
    taxonomy: str | None = None
    strict_spans: bool = False
    beam: int = 1
    step_cap: int = 256
    orders: str = "all"
    provider: str = "gold"
    seed: int = 0

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def override(self, **kwargs) -> "RunConfig":
        """Apply non-None flag values on top of the file-loaded config."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return dataclasses.replace(self, **updates)

    def resolved_tau(self) -> float:
        return self.tau if self.tau is not None else self.k / 2

    def validate(self) -> None:
        if not 1 <= self.k <= N_QUAD_ORDERS:
            raise ConfigError(f"k must be in [1, {N_QUAD_ORDERS}], got {self.k}")
        if self.resolved_tau() <= 0:
            raise ConfigError(f"tau must be positive, got {self.resolved_tau()}")
        if self.beam < 1:
            raise ConfigError(f"beam width must be >= 1, got {self.beam}")
        for name in ("data", "taxonomy"):
            value = getattr(self, name)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{name} path does not exist: {value}")

    def write_snapshot(self, out_path: str | Path, command: str) -> Path:
        """Provenance snapshot of the resolved configuration, placed next to
        the output artifact. Deterministic bytes for identical runs."""
        snapshot_path = Path(str(out_path) + ".config.json")
        payload = {"command": command, **dataclasses.asdict(self)}
        snapshot_path.write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return snapshot_path
