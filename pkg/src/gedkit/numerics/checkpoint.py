"""JSON parameter checkpoints.

Floats are written with Python's shortest round-trip repr, so every float64
survives save/load unchanged.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FORMAT = "gedkit-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, params: dict, **meta) -> None:
    blob = {"format": FORMAT, "version": VERSION, "params": {}}
    for name, value in params.items():
        arr = np.asarray(getattr(value, "data", value), dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise CheckpointError(f"parameter {name!r} holds non-finite values")
        blob["params"][name] = {"shape": list(arr.shape), "data": arr.reshape(-1).tolist()}
    blob.update(meta)
    Path(path).write_text(json.dumps(blob), encoding="utf-8")


def load_checkpoint(path) -> tuple[dict, dict]:
    """Return ``(params, meta)``: arrays keyed by name, plus every other top-level field."""
    try:
        blob = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: {exc}") from None
    if blob.get("format") != FORMAT:
        raise CheckpointError(f"{path}: not a {FORMAT} file")
    params = {}
    for name, rec in blob.pop("params").items():
        arr = np.array(rec["data"], dtype=np.float64)
        shape = tuple(rec["shape"])
        if arr.size != int(np.prod(shape)):
            raise CheckpointError(f"{path}: parameter {name!r} has {arr.size} values for shape {shape}")
        params[name] = arr.reshape(shape)
    return params, blob
