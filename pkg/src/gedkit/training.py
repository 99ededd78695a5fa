"""Mini-batch Adam training with best-on-validation model selection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, make_batches
from .graph import LabelEncoder
from .model import SimGNN, SimGNNConfig
from .numerics import Adam, Tape

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    iterations: int = 10000
    batch_size: int = 128
    lr: float = 1e-3
    val_every: int = 100
    seed: int = 0


@dataclass
class TrainResult:
    model: SimGNN
    log: list = field(default_factory=list)
    best_iteration: int = 0
    best_val_mse: float = math.inf

    @property
    def initial_val_mse(self) -> float:
        return self.log[0]["val_mse"]


def predict_pairs(model: SimGNN, pairs, chunk: int = 512) -> np.ndarray:
    if not pairs:
        return np.zeros(0)
    return np.concatenate([model.predict_many(pairs[s:s + chunk]) for s in range(0, len(pairs), chunk)])


def validation_mse(model: SimGNN, dataset: Dataset, role: str = "val") -> float:
    pairs = dataset.pairs(role)
    if not pairs:
        return math.nan
    return float(np.mean((predict_pairs(model, pairs) - dataset.targets(role)) ** 2))


def train(dataset: Dataset, model_config: SimGNNConfig | None = None, config: TrainConfig | None = None,
          encoder: LabelEncoder | None = None) -> TrainResult:
    """Train a fresh model; the returned model holds the parameters with the lowest validation MSE."""
    model_config = model_config or SimGNNConfig()
    config = config or TrainConfig()
    samples = dataset.samples.get("train", [])
    if not samples:
        raise ValueError("no training pairs")
    encoder = encoder or LabelEncoder.fit(dataset.graphs.values())
    model = SimGNN(model_config, encoder)
    opt = Adam(model.parameters(), lr=config.lr)

    result = TrainResult(model)
    best_state = model.state_dict()
    result.best_val_mse = validation_mse(model, dataset)
    result.log.append({"iteration": 0, "train_loss": None, "val_mse": result.best_val_mse})

    epoch = 0
    batches = []
    recent = []
    for it in range(1, config.iterations + 1):
        if not batches:
            batches = make_batches(samples, config.batch_size, config.seed, epoch)[::-1]
            epoch += 1
        batch = batches.pop()
        pairs = [(dataset.graphs[s.i], dataset.graphs[s.j]) for s in batch]
        targets = [s.similarity for s in batch]
        with Tape():
            loss = model.loss(pairs, targets)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingError(
                    f"non-finite loss {value} at iteration {it} (epoch {epoch}, batch of {len(batch)}, "
                    f"first pair {batch[0].i}/{batch[0].j}); try a smaller learning rate")
            loss.backward()
        opt.step()
        recent.append(value)
        if it % config.val_every == 0 or it == config.iterations:
            val = validation_mse(model, dataset)
            entry = {"iteration": it, "train_loss": float(np.mean(recent)), "val_mse": val}
            result.log.append(entry)
            recent = []
            log.info("iter %d train %.5f val %.5f", it, entry["train_loss"], val)
            if val < result.best_val_mse:
                result.best_val_mse, result.best_iteration = val, it
                best_state = model.state_dict()
    model.load_state_dict(best_state)
    return result
