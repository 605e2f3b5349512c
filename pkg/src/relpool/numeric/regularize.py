"""Inverted dropout and DropConnect."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, mul


def _keep_mask(rng: np.random.Generator, shape, rate: float, dtype) -> np.ndarray:
    keep = rng.random(shape) >= rate
    return keep.astype(dtype) / np.asarray(1.0 - rate, dtype=dtype)


def _check_rate(rate: float) -> None:
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"drop rate must lie in [0, 1), got {rate}")


def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Zero each element with probability ``rate`` and rescale survivors.

    Identity when ``training`` is false or ``rate`` is 0.
    """
    _check_rate(rate)
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in training mode needs a random generator")
    return mul(x, Tensor(_keep_mask(rng, x.shape, rate, x.dtype)))


def dropconnect(weight: Tensor, rate: float, training: bool,
                rng: np.random.Generator | None = None) -> Tensor:
    """Bernoulli-mask the entries of a 2-D weight matrix.

    Call once per forward pass and reuse the result across time steps; the
    mask is drawn fresh on every call.
    """
    if weight.ndim != 2:
        raise ValueError(f"dropconnect expects a 2-D weight, got shape {weight.shape}")
    return dropout(weight, rate, training, rng)
