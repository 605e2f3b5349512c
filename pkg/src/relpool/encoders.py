"""Sentence encoders mapping input vectors V (B, T, d) to abstract vectors A (B, T, d_A).

All encoders work on right-padded batches.  ``mask`` is a (B, T) 0/1 array
marking real tokens; encoders keep padded rows from leaking into real ones,
so a sentence encodes the same alone or inside a batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numeric import Module, Tensor, dropconnect, dropout, parameter
from .numeric import ops

ENCODER_KINDS = ("CNN", "BiLSTM", "BiLSTM-CNN", "BiLSTM-GCN")


@dataclass(frozen=True)
class EncoderConfig:
    kind: str
    lstm_layers: int = 2
    lstm_hidden: int = 300
    cnn_windows: tuple[int, ...] = (2, 3, 4, 5)
    cnn_filters: int = 200
    gcn_layers: int = 2
    gcn_hidden: int = 300
    layer_dropout: float = 0.5
    dropconnect: float = 0.5

    def __post_init__(self):
        if self.kind not in ENCODER_KINDS:
            raise ValueError(f"unknown encoder {self.kind!r}; expected one of {ENCODER_KINDS}")
        extents = [self.lstm_layers, self.lstm_hidden, self.cnn_filters, self.gcn_layers,
                   self.gcn_hidden, *self.cnn_windows]
        if not self.cnn_windows or min(extents) < 1:
            raise ValueError("encoder extents must all be positive")

    @property
    def uses_tree(self) -> bool:
        return self.kind == "BiLSTM-GCN"


def _glorot(rng, shape, fan_in, fan_out, dtype):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, shape).astype(dtype)


def _mask_column(mask: np.ndarray, t: int, dtype) -> np.ndarray:
    return mask[:, t:t + 1].astype(dtype)


class LSTMDirection(Module):
    """One unidirectional LSTM (input, forget, output gates and candidate, no peepholes)."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator, dtype=np.float32,
                 reverse: bool = False):
        self.hidden = hidden
        self.reverse = reverse
        self.w_input = parameter(rng.uniform(-0.1, 0.1, (in_dim, 4 * hidden)).astype(dtype))
        self.w_hidden = parameter(rng.uniform(-0.1, 0.1, (hidden, 4 * hidden)).astype(dtype))
        bias = np.zeros(4 * hidden, dtype=dtype)
        bias[hidden:2 * hidden] = 1.0  # forget gate
        self.bias = parameter(bias)

    def __call__(self, x: Tensor, mask: np.ndarray, training: bool = False,
                 rng: np.random.Generator | None = None, drop_rate: float = 0.0) -> Tensor:
        B, T, _ = x.shape
        H = self.hidden
        dtype = x.dtype
        xw = ops.add(ops.matmul(x, self.w_input), self.bias)
        # one DropConnect mask per forward pass, shared by every time step
        w_hidden = dropconnect(self.w_hidden, drop_rate, training, rng)
        h = Tensor(np.zeros((B, H), dtype=dtype))
        c = Tensor(np.zeros((B, H), dtype=dtype))
        full = bool(mask.all())
        outputs: list[Tensor | None] = [None] * T
        steps = range(T - 1, -1, -1) if self.reverse else range(T)
        for t in steps:
            gates = ops.add(ops.index(xw, (slice(None), t)), ops.matmul(h, w_hidden))
            i = ops.sigmoid(ops.index(gates, (slice(None), slice(0, H))))
            f = ops.sigmoid(ops.index(gates, (slice(None), slice(H, 2 * H))))
            g = ops.tanh(ops.index(gates, (slice(None), slice(2 * H, 3 * H))))
            o = ops.sigmoid(ops.index(gates, (slice(None), slice(3 * H, 4 * H))))
            c_new = ops.add(ops.mul(f, c), ops.mul(i, g))
            h_new = ops.mul(o, ops.tanh(c_new))
            if full:
                h, c = h_new, c_new
                outputs[t] = h_new
            else:
                m = _mask_column(mask, t, dtype)
                keep = 1.0 - m
                h = ops.add(ops.mul(h_new, m), ops.mul(h, keep))
                c = ops.add(ops.mul(c_new, m), ops.mul(c, keep))
                outputs[t] = ops.mul(h_new, m)
        return ops.stack(outputs, axis=1)


class BiLSTMEncoder(Module):
    """Stacked bidirectional LSTM; each token gets ``[forward h_i, backward h_i]``."""

    def __init__(self, in_dim: int, config: EncoderConfig, rng: np.random.Generator, dtype=np.float32):
        self.config = config
        H = config.lstm_hidden
        self.layers = []
        for layer in range(config.lstm_layers):
            d = in_dim if layer == 0 else 2 * H
            self.layers.append(_BiLayer(d, H, rng, dtype))
        self.out_dim = 2 * H

    def __call__(self, v: Tensor, mask: np.ndarray, adjacency=None, training: bool = False,
                 rng: np.random.Generator | None = None) -> Tensor:
        x = v
        for k, layer in enumerate(self.layers):
            if k > 0:
                x = dropout(x, self.config.layer_dropout, training, rng)
            x = layer(x, mask, training, rng, self.config.dropconnect)
        return x


class _BiLayer(Module):
    def __init__(self, in_dim, hidden, rng, dtype):
        self.forward = LSTMDirection(in_dim, hidden, rng, dtype)
        self.backward = LSTMDirection(in_dim, hidden, rng, dtype, reverse=True)

    def __call__(self, x, mask, training, rng, drop_rate):
        return ops.concat([self.forward(x, mask, training, rng, drop_rate),
                           self.backward(x, mask, training, rng, drop_rate)], axis=-1)


class CNNEncoder(Module):
    """Same-length 1-D convolutions, one bank per window size, tanh, concatenated."""

    def __init__(self, in_dim: int, config: EncoderConfig, rng: np.random.Generator, dtype=np.float32):
        self.windows = tuple(config.cnn_windows)
        F = config.cnn_filters
        self.weights = []
        for k in self.windows:
            self.weights.append(_ConvBank(k, in_dim, F, rng, dtype))
        self.out_dim = F * len(self.windows)

    def __call__(self, v: Tensor, mask: np.ndarray, adjacency=None, training: bool = False,
                 rng: np.random.Generator | None = None) -> Tensor:
        # padded rows must be zero so they act like the convolution's zero padding
        if not mask.all():
            v = ops.mul(v, mask[..., None].astype(v.dtype))
        return ops.concat([bank(v) for bank in self.weights], axis=-1)


class _ConvBank(Module):
    def __init__(self, k, in_dim, filters, rng, dtype):
        self.weight = parameter(_glorot(rng, (k, in_dim, filters), k * in_dim, filters, dtype))
        self.bias = parameter(np.zeros(filters, dtype=dtype))

    def __call__(self, v):
        return ops.tanh(ops.conv1d(v, self.weight, self.bias))


class BiLSTMCNNEncoder(Module):
    def __init__(self, in_dim: int, config: EncoderConfig, rng: np.random.Generator, dtype=np.float32):
        self.lstm = BiLSTMEncoder(in_dim, config, rng, dtype)
        self.cnn = CNNEncoder(self.lstm.out_dim, config, rng, dtype)
        self.out_dim = self.cnn.out_dim

    def __call__(self, v, mask, adjacency=None, training=False, rng=None):
        h = self.lstm(v, mask, training=training, rng=rng)
        return self.cnn(h, mask, training=training, rng=rng)


class GCNLayer(Module):
    """``ReLU(D^-1 (A + I) H W + b)`` over a batch of normalized adjacencies."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype=np.float32):
        self.weight = parameter(_glorot(rng, (in_dim, out_dim), in_dim, out_dim, dtype))
        self.bias = parameter(np.zeros(out_dim, dtype=dtype))

    def __call__(self, h: Tensor, norm_adjacency: Tensor) -> Tensor:
        return ops.relu(ops.add(ops.matmul(norm_adjacency, ops.matmul(h, self.weight)), self.bias))


class BiLSTMGCNEncoder(Module):
    def __init__(self, in_dim: int, config: EncoderConfig, rng: np.random.Generator, dtype=np.float32):
        self.lstm = BiLSTMEncoder(in_dim, config, rng, dtype)
        self.gcn = []
        d = self.lstm.out_dim
        for _ in range(config.gcn_layers):
            self.gcn.append(GCNLayer(d, config.gcn_hidden, rng, dtype))
            d = config.gcn_hidden
        self.out_dim = config.gcn_hidden

    def __call__(self, v, mask, adjacency=None, training=False, rng=None):
        if adjacency is None:
            raise ValueError("BiLSTM-GCN needs the dependency adjacency")
        B, T = mask.shape
        if adjacency.shape != (B, T, T):
            raise ValueError(f"adjacency shape {adjacency.shape} does not match a batch of {B} x {T} tokens")
        h = self.lstm(v, mask, training=training, rng=rng)
        norm = adjacency if isinstance(adjacency, Tensor) else Tensor(adjacency, dtype=h.dtype)
        for layer in self.gcn:
            h = layer(h, norm)
        return h


_ENCODERS = {
    "CNN": CNNEncoder,
    "BiLSTM": BiLSTMEncoder,
    "BiLSTM-CNN": BiLSTMCNNEncoder,
    "BiLSTM-GCN": BiLSTMGCNEncoder,
}


def build_encoder(config: EncoderConfig, in_dim: int, rng: np.random.Generator, dtype=np.float32) -> Module:
    return _ENCODERS[config.kind](in_dim, config, rng, dtype)


def normalized_adjacency(adjacencies: Sequence[np.ndarray], T: int, dtype=np.float32) -> np.ndarray:
    """Stack ``D^-1 (A + I)`` for each sentence into a (B, T, T) array.

    ``adjacencies`` already carry self-loops.  Padded positions get only a
    self-loop so they never mix with real tokens.
    """
    out = np.zeros((len(adjacencies), T, T), dtype=dtype)
    for b, a in enumerate(adjacencies):
        n = a.shape[0]
        out[b, :n, :n] = a / a.sum(axis=1, keepdims=True)
        out[b, range(n, T), range(n, T)] = 1.0
    return out
