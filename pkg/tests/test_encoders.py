import math

import numpy as np
import pytest

from relpool.encoders import (
    ENCODER_KINDS,
    BiLSTMEncoder,
    CNNEncoder,
    EncoderConfig,
    GCNLayer,
    LSTMDirection,
    build_encoder,
    normalized_adjacency,
)
from relpool.numeric import Tensor, check_gradients, no_grad, ops
from relpool.syntax import DependencyTree, gcn_adjacency

from conftest import jitter, kink_margin, random_tree

FULL_SIZE_DIMS = {"CNN": 800, "BiLSTM": 600, "BiLSTM-CNN": 800, "BiLSTM-GCN": 300}
TINY = dict(lstm_layers=2, lstm_hidden=3, cnn_windows=(2, 3), cnn_filters=2, gcn_layers=2, gcn_hidden=4)


def adjacency_batch(heads, T, dtype=np.float64):
    return normalized_adjacency([gcn_adjacency(DependencyTree.from_heads(h))[0] for h in heads], T, dtype)


def run(encoder, v, heads=None, mask=None, **kw):
    B, T, _ = v.shape
    mask = np.ones((B, T), dtype=bool) if mask is None else mask
    adj = adjacency_batch(heads, T, v.dtype) if heads is not None else None
    return encoder(Tensor(v), mask, adj, **kw)


# -- shapes -------------------------------------------------------------------


@pytest.mark.parametrize("kind", ENCODER_KINDS)
@pytest.mark.parametrize("n", [1, 2, 3, 17])
def test_full_size_shapes(kind, n):
    rng = np.random.default_rng(n)
    enc = build_encoder(EncoderConfig(kind), 330, rng)
    heads = [random_tree(rng, n)]
    with no_grad():
        a = run(enc, rng.normal(size=(1, n, 330)).astype(np.float32), heads)
    assert enc.out_dim == FULL_SIZE_DIMS[kind]
    assert a.shape == (1, n, FULL_SIZE_DIMS[kind])


# -- hand computations ------------------------------------------------------------


def test_cnn_zero_input_zero_bias():
    enc = CNNEncoder(4, EncoderConfig("CNN", cnn_windows=(2, 3), cnn_filters=5), np.random.default_rng(0))
    a = run(enc, np.zeros((1, 3, 4), dtype=np.float32))
    assert not a.data.any()


def test_cnn_window_two_by_hand():
    enc = CNNEncoder(1, EncoderConfig("CNN", cnn_windows=(2,), cnn_filters=1), np.random.default_rng(0))
    bank = enc.weights[0]
    bank.weight.data = np.array([[[0.5]], [[-0.25]]])
    bank.bias.data = np.array([0.1])
    a = run(enc, np.array([[[1.0], [2.0], [3.0]]])).data[0, :, 0]
    # even window: the extra zero pad sits on the right
    want = [math.tanh(0.5 * 1 - 0.25 * 2 + 0.1),
            math.tanh(0.5 * 2 - 0.25 * 3 + 0.1),
            math.tanh(0.5 * 3 - 0.25 * 0 + 0.1)]
    np.testing.assert_allclose(a, want, rtol=1e-12)


def test_lstm_zero_fixed_point():
    cell = LSTMDirection(3, 2, np.random.default_rng(0), dtype=np.float64)
    for p in cell.parameters():
        p.data = np.zeros_like(p.data)
    h = cell(Tensor(np.ones((1, 4, 3))), np.ones((1, 4), dtype=bool))
    assert not h.data.any()


def test_lstm_scalar_two_steps_by_hand():
    cell = LSTMDirection(1, 1, np.random.default_rng(0), dtype=np.float64)
    wx = [0.5, -0.3, 0.8, 0.2]   # i, f, g, o
    wh = [0.1, 0.4, -0.6, 0.7]
    b = [0.0, 1.0, 0.1, -0.2]
    cell.w_input.data = np.array([wx])
    cell.w_hidden.data = np.array([wh])
    cell.bias.data = np.array(b)
    xs = [1.5, -2.0]

    def sig(z):
        return 1 / (1 + math.exp(-z))

    h = c = 0.0
    want = []
    for x in xs:
        i = sig(wx[0] * x + wh[0] * h + b[0])
        f = sig(wx[1] * x + wh[1] * h + b[1])
        g = math.tanh(wx[2] * x + wh[2] * h + b[2])
        o = sig(wx[3] * x + wh[3] * h + b[3])
        c = f * c + i * g
        h = o * math.tanh(c)
        want.append(h)
    out = cell(Tensor(np.array([[[x] for x in xs]])), np.ones((1, 2), dtype=bool))
    np.testing.assert_allclose(out.data[0, :, 0], want, rtol=1e-12)


def test_lstm_initialisation():
    cell = LSTMDirection(5, 4, np.random.default_rng(0))
    np.testing.assert_array_equal(cell.bias.data, [0] * 4 + [1] * 4 + [0] * 8)
    assert np.abs(cell.w_input.data).max() <= 0.1 and np.abs(cell.w_hidden.data).max() <= 0.1


def test_gcn_two_nodes_by_hand():
    layer = GCNLayer(1, 1, np.random.default_rng(0), dtype=np.float64)
    layer.weight.data = np.array([[2.0]])
    layer.bias.data = np.array([-1.0])
    out = layer(Tensor(np.array([[[1.0], [3.0]]])), Tensor(adjacency_batch([[2, 0]], 2)))
    np.testing.assert_allclose(out.data[0, :, 0], [3.0, 3.0])  # relu(0.5 * (2 + 6) - 1)


def test_gcn_single_token_is_dense_layer():
    rng = np.random.default_rng(1)
    layer = GCNLayer(3, 2, rng, dtype=np.float64)
    h = rng.normal(size=(1, 1, 3))
    out = layer(Tensor(h), Tensor(adjacency_batch([[0]], 1)))
    np.testing.assert_allclose(out.data[0, 0], np.maximum(h[0, 0] @ layer.weight.data + layer.bias.data, 0))


def test_gcn_star_tree_closed_form():
    rng = np.random.default_rng(2)
    n, d = 6, 4
    layer = GCNLayer(d, d, rng, dtype=np.float64)
    layer.weight.data = np.eye(d)
    layer.bias.data = np.zeros(d)
    h = rng.normal(size=(1, n, d))
    head = [0] + [1] * (n - 1)  # token 1 is the centre
    out = layer(Tensor(h), Tensor(adjacency_batch([head], n))).data[0]
    np.testing.assert_allclose(out[0], np.maximum(h[0].sum(axis=0) / n, 0))
    for leaf in range(1, n):
        np.testing.assert_allclose(out[leaf], np.maximum((h[0, 0] + h[0, leaf]) / 2, 0))


def test_gcn_permutation_equivariance():
    rng = np.random.default_rng(3)
    n = 7
    layer = GCNLayer(3, 5, rng, dtype=np.float64)
    head = random_tree(rng, n)
    h = rng.normal(size=(1, n, 3))
    perm = rng.permutation(n)  # new position k holds old token perm[k]
    inv = np.argsort(perm)
    permuted_head = [0 if head[perm[k]] == 0 else int(inv[head[perm[k]] - 1]) + 1 for k in range(n)]
    out = layer(Tensor(h), Tensor(adjacency_batch([head], n))).data[0]
    out_p = layer(Tensor(h[:, perm]), Tensor(adjacency_batch([permuted_head], n))).data[0]
    np.testing.assert_allclose(out_p, out[perm], rtol=1e-12)


def test_gcn_rejects_wrong_tree_length():
    enc = build_encoder(EncoderConfig("BiLSTM-GCN", **TINY), 3, np.random.default_rng(0))
    with pytest.raises(ValueError, match="adjacency"):
        enc(Tensor(np.zeros((1, 4, 3))), np.ones((1, 4), dtype=bool), adjacency_batch([[0, 1, 1]], 3))


def test_bilstm_cnn_is_composition():
    rng = np.random.default_rng(4)
    cfg = EncoderConfig("BiLSTM-CNN", **TINY)
    enc = build_encoder(cfg, 3, rng, np.float64)
    v = rng.normal(size=(2, 5, 3))
    mask = np.ones((2, 5), dtype=bool)
    direct = enc(Tensor(v), mask).data
    staged = enc.cnn(enc.lstm(Tensor(v), mask), mask).data
    np.testing.assert_array_equal(direct, staged)


# -- batching and determinism --------------------------------------------------------


@pytest.mark.parametrize("kind", ENCODER_KINDS)
def test_padding_does_not_leak(kind):
    rng = np.random.default_rng(5)
    enc = build_encoder(EncoderConfig(kind, **TINY), 3, rng, np.float64)
    lengths = [2, 5, 3]
    T = max(lengths)
    heads = [random_tree(rng, n) for n in lengths]
    v = rng.normal(size=(3, T, 3))
    mask = np.arange(T)[None, :] < np.array(lengths)[:, None]
    v[~mask] = 99.0  # garbage in padded rows must not matter
    batched = enc(Tensor(v), mask, adjacency_batch(heads, T)).data
    for b, n in enumerate(lengths):
        alone = enc(Tensor(v[b:b + 1, :n]), np.ones((1, n), dtype=bool),
                    adjacency_batch([heads[b]], n)).data[0]
        np.testing.assert_allclose(batched[b, :n], alone, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("kind", ENCODER_KINDS)
def test_equal_seeds_bit_identical(kind):
    def once():
        rng = np.random.default_rng(9)
        enc = build_encoder(EncoderConfig(kind, **TINY), 3, rng)
        v = rng.normal(size=(2, 4, 3)).astype(np.float32)
        return run(enc, v, [[0, 1, 1, 3], [2, 0, 2, 3]], training=True, rng=rng).data.tobytes()
    assert once() == once()


def test_training_mode_applies_dropconnect():
    rng = np.random.default_rng(6)
    enc = BiLSTMEncoder(3, EncoderConfig("BiLSTM", **TINY), rng, np.float64)
    v = rng.normal(size=(1, 4, 3))
    mask = np.ones((1, 4), dtype=bool)
    infer = enc(Tensor(v), mask).data
    np.testing.assert_array_equal(infer, enc(Tensor(v), mask).data)
    assert not np.allclose(infer, enc(Tensor(v), mask, training=True, rng=rng).data)


# -- gradients ----------------------------------------------------------------------------


@pytest.mark.parametrize("kind", ENCODER_KINDS)
def test_encoder_gradients(kind):
    for seed in range(20):
        rng = np.random.default_rng(seed)
        enc = build_encoder(EncoderConfig(kind, lstm_layers=2, lstm_hidden=2, cnn_windows=(2, 3),
                                          cnn_filters=2, gcn_layers=2, gcn_hidden=3), 3, rng, np.float64)
        jitter(enc, rng)
        n = 4
        v = Tensor(rng.normal(size=(1, n, 3)), requires_grad=True)
        heads = [random_tree(rng, n)]
        w = Tensor(rng.normal(size=(1, n, enc.out_dim)))
        mask = np.ones((1, n), dtype=bool)
        adj = adjacency_batch(heads, n)

        def loss():
            return ops.sum(ops.mul(enc(v, mask, adj), w))

        if kink_margin(loss) > 1e-3:
            break
    check_gradients(loss, [v] + enc.parameters(), rtol=1e-4, atol=1e-6)
