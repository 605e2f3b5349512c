"""SGD with Nesterov momentum."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .tensor import Tensor


class MissingGradientError(RuntimeError):
    """A trainable parameter reached step() without a gradient."""


class SGD:
    """Stochastic gradient descent with (optionally Nesterov) momentum.

    With ``nesterov=True`` each step applies the lookahead-folded update::

        v <- momentum * v - lr * g
        p <- p + momentum * v - lr * g

    Classical momentum uses ``p <- p + v`` instead.  With ``momentum=0``
    both reduce to ``p <- p - lr * g``.  Velocity buffers are created lazily
    at the first step, zero-initialized, one per parameter.
    """

    def __init__(self, params: Iterable[Tensor], lr: float = 0.5, momentum: float = 0.8,
                 nesterov: bool = True):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        if not 0.0 <= momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {momentum}")
        self.params = list(params)
        self.lr = lr
        self.momentum = momentum
        self.nesterov = nesterov
        self.velocity: dict[int, np.ndarray] = {}

    def step(self) -> None:
        for i, p in enumerate(self.params):
            if p.grad is None:
                name = p.name or f"#{i}"
                raise MissingGradientError(
                    f"parameter {name} {p.shape} has no gradient; is it detached from the loss?")
        lr = np.asarray(self.lr, dtype=self.params[0].dtype) if self.params else self.lr
        mu = np.asarray(self.momentum, dtype=lr.dtype) if self.params else self.momentum
        for i, p in enumerate(self.params):
            g = p.grad
            v = self.velocity.get(i)
            if v is None:
                v = self.velocity[i] = np.zeros_like(p.data)
            v *= mu
            v -= lr * g
            if self.nesterov:
                p.data += mu * v - lr * g
            else:
                p.data += v
            p.grad = None

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None
