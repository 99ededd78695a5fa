"""Run configuration: defaults, overridden by a JSON file, overridden by command-line flags."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .dataset import DEFAULT_SIZE_THRESHOLD
from .ged.search import DEFAULT_BEAM_WIDTH, DEFAULT_BUDGET
from .model import SimGNNConfig
from .training import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    gcn_dims: tuple = (64, 32, 16)
    ntn_k: int = 16
    bins: int = 16
    fc_dims: tuple = (16, 8, 4, 1)
    pooling: str = "learnable-gc"
    strategy2: bool = True
    batch_size: int = 128
    lr: float = 1e-3
    iterations: int = 10000
    val_every: int = 100
    seed: int = 0
    jobs: int = 1
    size_threshold: int = DEFAULT_SIZE_THRESHOLD
    beam_width: int = DEFAULT_BEAM_WIDTH
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        for name in ("batch_size", "val_every", "jobs", "beam_width", "budget", "ntn_k", "bins"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.iterations < 0 or self.lr <= 0:
            raise ValueError("iterations must be >= 0 and lr > 0")

    def model_config(self) -> SimGNNConfig:
        return SimGNNConfig(self.gcn_dims, self.ntn_k, self.bins, self.fc_dims, self.pooling, self.strategy2,
                            self.seed)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.iterations, self.batch_size, self.lr, self.val_every, self.seed)

    def to_json(self) -> dict:
        d = asdict(self)
        d["gcn_dims"], d["fc_dims"] = list(self.gcn_dims), list(self.fc_dims)
        return d

    def updated(self, values: dict, source: str = "overrides") -> "RunConfig":
        """Copy with ``values`` applied; keys may use dashes or underscores."""
        types = {f.name: f.type for f in fields(self)}
        current = asdict(self)
        for key, value in values.items():
            name = key.replace("-", "_")
            if name not in types:
                raise ConfigError(f"{source}: unknown setting {key!r}")
            if value is None:
                continue
            current[name] = _coerce(name, value, current[name], source)
        try:
            return RunConfig(**current)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: {exc}") from None


def _coerce(name, value, default, source):
    try:
        if isinstance(default, tuple):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return tuple(int(v) for v in value)
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError("expected true or false")
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or int(value) != value:
                raise TypeError("expected an integer")
            return int(value)
        if isinstance(default, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: bad value {value!r} for {name}: {exc}") from None


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        cfg = cfg.updated(data, str(path))
    if overrides:
        cfg = cfg.updated(overrides, "command line")
    try:
        cfg.model_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg
