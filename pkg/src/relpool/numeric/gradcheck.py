"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tape, Tensor, backward, no_grad


def numeric_grad(fn: Callable[[], Tensor], param: Tensor, h: float = 1e-5) -> np.ndarray:
    """Central differences of the scalar ``fn()`` w.r.t. every entry of ``param``."""
    out = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    gflat = out.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            plus = fn().item()
            flat[i] = orig - h
            minus = fn().item()
            flat[i] = orig
            gflat[i] = (plus - minus) / (2 * h)
    return out


def analytic_grads(fn: Callable[[], Tensor], params: Sequence[Tensor]) -> list[np.ndarray]:
    for p in params:
        p.grad = None
    with Tape():
        loss = fn()
        backward(loss)
    grads = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]
    for p in params:
        p.grad = None
    return grads


def check_gradients(fn: Callable[[], Tensor], params: Sequence[Tensor], rtol: float = 1e-4,
                    atol: float = 1e-6, h: float = 1e-5) -> float:
    """Compare backprop against central differences; raise AssertionError on mismatch.

    ``fn`` must be deterministic.  Returns the worst absolute discrepancy.
    """
    worst = 0.0
    for p, analytic in zip(params, analytic_grads(fn, params)):
        numeric = numeric_grad(fn, p, h)
        diff = np.abs(analytic - numeric)
        worst = max(worst, float(diff.max(initial=0.0)))
        bad = diff > atol + rtol * np.abs(numeric)
        if bad.any():
            i = np.unravel_index(np.argmax(diff), diff.shape)
            name = p.name or "parameter"
            raise AssertionError(
                f"{name}{list(p.shape)}: {int(bad.sum())} entries off; worst at {i}: "
                f"analytic={analytic[i]:.8g} numeric={numeric[i]:.8g}")
    return worst
