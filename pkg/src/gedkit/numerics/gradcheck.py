"""Central finite differences, the independent oracle for analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tape, Tensor


def numerical_gradient(f, t: Tensor, h: float = 1e-5) -> np.ndarray:
    """d f() / d t by central differences; ``f`` returns a float and reads ``t.data``."""
    grad = np.zeros_like(t.data)
    flat = t.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = f()
        flat[i] = orig - h
        down = f()
        flat[i] = orig
        out[i] = (up - down) / (2.0 * h)
    return grad


def analytic_gradients(loss_fn, params: dict) -> dict:
    for p in params.values():
        p.grad = None
    with Tape():
        loss = loss_fn()
        loss.backward()
    return {name: (p.grad if p.grad is not None else np.zeros_like(p.data)) for name, p in params.items()}


@dataclass
class GradMismatch:
    name: str
    index: tuple
    analytic: float
    numeric: float


def compare(analytic: np.ndarray, numeric: np.ndarray, atol=1e-5, rtol=1e-4) -> np.ndarray:
    """Boolean mask of entries that fail both the absolute and the relative tolerance."""
    diff = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    return (diff > atol) & (diff > rtol * scale)


def check_gradients(loss_fn, params: dict, h=1e-5, atol=1e-5, rtol=1e-4) -> list[GradMismatch]:
    """Compare tape gradients of ``loss_fn`` against finite differences for every entry of ``params``.

    ``loss_fn`` builds a scalar Tensor from the current parameter values.
    """
    grads = analytic_gradients(loss_fn, params)
    bad = []
    for name, p in params.items():
        num = numerical_gradient(lambda: loss_fn().item(), p, h)
        for idx in zip(*np.nonzero(compare(grads[name], num, atol, rtol))):
            bad.append(GradMismatch(name, tuple(int(i) for i in idx), float(grads[name][idx]), float(num[idx])))
    return bad
