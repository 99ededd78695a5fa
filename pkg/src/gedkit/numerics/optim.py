from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


class MissingGradError(RuntimeError):
    pass


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


class Adam:
    """Adam with bias-corrected moments. ``step`` updates in place and zeroes the grads."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params: list[Tensor] = list(params)
        self.state = AdamState(lr, beta1, beta2, eps, 0,
                               [np.zeros_like(p.data) for p in self.params],
                               [np.zeros_like(p.data) for p in self.params])

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        for i, p in enumerate(self.params):
            if p.grad is None:
                raise MissingGradError(f"parameter {i} (shape {p.shape}) has no gradient")
        s = self.state
        s.step += 1
        c1 = 1.0 - s.beta1**s.step
        c2 = 1.0 - s.beta2**s.step
        for p, m, v in zip(self.params, s.m, s.v):
            g = p.grad
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * g * g
            p.data -= s.lr * (m / c1) / (np.sqrt(v / c2) + s.eps)
            p.grad = np.zeros_like(p.data)
