"""Dense tensors and a tape-based reverse-mode autodiff engine.

Every differentiable primitive computes its forward value with numpy and,
when any input requires a gradient, appends a :class:`TapeNode` to the
active :class:`Tape`.  :func:`backward` then walks the tape in reverse
creation order, which is a valid topological order because nodes are only
ever appended after their inputs exist.
"""

from __future__ import annotations

import contextlib
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "Tape",
    "TapeNode",
    "ShapeError",
    "StaleTapeError",
    "backward",
    "no_grad",
    "precision",
    "get_default_dtype",
    "add",
    "sub",
    "mul",
    "neg",
    "matmul",
    "concat",
    "stack",
    "index",
    "reshape",
    "tanh",
    "sigmoid",
    "relu",
    "softmax",
    "log_softmax",
    "nll_loss",
    "embedding",
    "conv1d",
    "masked_max",
    "sum",
    "mean",
]

_DTYPES = {"float32": np.float32, "float64": np.float64}


class ShapeError(ValueError):
    """Operand shapes do not conform for a primitive."""


class StaleTapeError(RuntimeError):
    """backward() was called on a tape that has already been consumed."""


class _State(threading.local):
    def __init__(self):
        self.tapes: list[Tape] = []
        self.default_tape: Tape | None = None
        self.grad_enabled = True
        self.dtype = np.float32


_state = _State()


def get_default_dtype():
    return _state.dtype


@contextlib.contextmanager
def precision(name: str):
    """Temporarily switch the default floating dtype ("float32" or "float64")."""
    if name not in _DTYPES:
        raise ValueError(f"unknown precision {name!r}; expected one of {sorted(_DTYPES)}")
    previous = _state.dtype
    _state.dtype = _DTYPES[name]
    try:
        yield
    finally:
        _state.dtype = previous


@contextlib.contextmanager
def no_grad():
    previous = _state.grad_enabled
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


@dataclass
class TapeNode:
    op: str
    inputs: tuple
    output: "Tensor"
    # maps the output gradient to one gradient (or None) per input
    backward: Callable[[np.ndarray], Sequence[np.ndarray | None]]
    saved: dict = field(default_factory=dict)


class Tape:
    """Append-only record of differentiable operations.

    Use as a context manager to scope a forward/backward pass::

        with Tape():
            loss = ...
            backward(loss)
    """

    def __init__(self):
        self.nodes: list[TapeNode] = []
        self.consumed = False

    def record(self, node: TapeNode) -> None:
        if self.consumed:
            raise StaleTapeError("cannot record onto a consumed tape; call reset() first")
        self.nodes.append(node)

    def reset(self) -> None:
        self.nodes = []
        self.consumed = False

    def __len__(self):
        return len(self.nodes)

    def __enter__(self):
        _state.tapes.append(self)
        return self

    def __exit__(self, *exc):
        _state.tapes.pop()
        return False


def _active_tape() -> Tape:
    if _state.tapes:
        return _state.tapes[-1]
    tape = _state.default_tape
    if tape is None or tape.consumed:
        tape = _state.default_tape = Tape()
    return tape


class Tensor:
    """A dense array that can take part in a reverse-mode graph."""

    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, dtype=None, name: str | None = None):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data)
        if dtype is not None:
            arr = arr.astype(dtype, copy=False)
        elif not np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(_state.dtype)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.name = name
        self._tape: Tape | None = None
        self._is_leaf = True

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.item())

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return index(self, key)


def _as_tensor(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.dtype if like is not None else None
    return Tensor(x, dtype=dtype)


def _make(op: str, data: np.ndarray, inputs: tuple, backward_fn, **saved) -> Tensor:
    needs = _state.grad_enabled and any(t.requires_grad for t in inputs)
    out = Tensor(data, dtype=data.dtype)
    if needs:
        out.requires_grad = True
        out._is_leaf = False
        tape = _active_tape()
        out._tape = tape
        tape.record(TapeNode(op, inputs, out, backward_fn, saved))
    return out


def backward(loss: Tensor) -> None:
    """Populate ``.grad`` on every leaf reachable from ``loss``.

    Gradients are added to any existing ``.grad`` so a tensor used several
    times (or across several losses) accumulates every contribution.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
    tape = loss._tape
    if tape is None or not loss.requires_grad:
        raise RuntimeError("loss is not connected to any tensor that requires grad")
    if tape.consumed:
        raise StaleTapeError("backward() already ran on this tape; reset it or build a new graph")
    if not tape.nodes:
        raise RuntimeError("tape is empty")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    leaves: dict[int, Tensor] = {}
    for node in reversed(tape.nodes):
        g = grads.pop(id(node.output), None)
        if g is None:
            continue
        for inp, gi in zip(node.inputs, node.backward(g)):
            if gi is None or not inp.requires_grad:
                continue
            key = id(inp)
            if key in grads:
                grads[key] = grads[key] + gi
            else:
                grads[key] = gi
            if inp._is_leaf:
                leaves[key] = inp
    for key, leaf in leaves.items():
        g = grads.get(key)
        if g is None:
            continue
        g = g.astype(leaf.dtype, copy=False)
        leaf.grad = g if leaf.grad is None else leaf.grad + g
    tape.consumed = True


# -- helpers -----------------------------------------------------------------


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not conform") from None


# -- elementwise arithmetic --------------------------------------------------


def add(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _broadcast_shape("add", a, b)
    sa, sb = a.shape, b.shape
    return _make("add", a.data + b.data, (a, b),
                 lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _broadcast_shape("sub", a, b)
    sa, sb = a.shape, b.shape
    return _make("sub", a.data - b.data, (a, b),
                 lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a, b) -> Tensor:
    a = _as_tensor(a, b if isinstance(b, Tensor) else None)
    b = _as_tensor(b, a)
    _broadcast_shape("mul", a, b)
    ad, bd = a.data, b.data
    return _make("mul", ad * bd, (a, b),
                 lambda g: (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)))


def neg(a: Tensor) -> Tensor:
    return _make("neg", -a.data, (a,), lambda g: (-g,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product.

    Supported forms: ``(m,k)@(k,n)``, ``(...,m,k)@(k,n)`` (shared weight) and
    ``(B,m,k)@(B,k,n)`` (batched).
    """
    a = _as_tensor(a)
    b = _as_tensor(b, a)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    if b.ndim > 2 and b.shape[:-2] != a.shape[:-2]:
        raise ShapeError(f"matmul: batch extents of {a.shape} and {b.shape} differ")
    ad, bd = a.data, b.data

    def grad_fn(g):
        ga = np.matmul(g, np.swapaxes(bd, -1, -2))
        if bd.ndim == 2:
            gb = ad.reshape(-1, ad.shape[-1]).T @ g.reshape(-1, g.shape[-1])
        else:
            gb = np.matmul(np.swapaxes(ad, -1, -2), g)
        return ga, gb

    return _make("matmul", np.matmul(ad, bd), (a, b), grad_fn)


# -- structural ops ----------------------------------------------------------


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = tuple(_as_tensor(t) for t in tensors)
    if not tensors:
        raise ShapeError("concat: no inputs")
    nd = tensors[0].ndim
    ax = axis % nd
    for t in tensors[1:]:
        if t.ndim != nd or t.shape[:ax] + t.shape[ax + 1:] != tensors[0].shape[:ax] + tensors[0].shape[ax + 1:]:
            raise ShapeError(f"concat: shapes {tensors[0].shape} and {t.shape} do not conform on axis {axis}")
    sizes = [t.shape[ax] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def grad_fn(g):
        return np.split(g, bounds, axis=ax)

    return _make("concat", np.concatenate([t.data for t in tensors], axis=ax), tensors, grad_fn)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(_as_tensor(t) for t in tensors)
    for t in tensors[1:]:
        if t.shape != tensors[0].shape:
            raise ShapeError(f"stack: shapes {tensors[0].shape} and {t.shape} differ")
    ax = axis % (tensors[0].ndim + 1)

    def grad_fn(g):
        return [np.take(g, i, axis=ax) for i in range(len(tensors))]

    return _make("stack", np.stack([t.data for t in tensors], axis=ax), tensors, grad_fn)


def index(a: Tensor, key) -> Tensor:
    """Basic or integer-array indexing (row selection)."""
    shape, dtype = a.shape, a.dtype

    def grad_fn(g):
        out = np.zeros(shape, dtype=dtype)
        np.add.at(out, key, g)
        return (out,)

    return _make("index", a.data[key], (a,), grad_fn)


def reshape(a: Tensor, shape) -> Tensor:
    orig = a.shape
    try:
        data = a.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view {orig} as {shape}") from None
    return _make("reshape", data, (a,), lambda g: (g.reshape(orig),))


# -- nonlinearities ----------------------------------------------------------


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return _make("tanh", y, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    # split by sign so neither branch overflows
    e = np.exp(-np.abs(x))
    y = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(x.dtype, copy=False)
    return _make("sigmoid", y, (a,), lambda g: (g * y * (1.0 - y),))


def relu(a: Tensor) -> Tensor:
    x = a.data
    pos = x > 0
    return _make("relu", np.where(pos, x, 0).astype(x.dtype, copy=False), (a,),
                 lambda g: (g * pos,))


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    z = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def grad_fn(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _make("softmax", y, (a,), grad_fn)


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    z = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    y = z - lse
    p = np.exp(y)
    return _make("log_softmax", y, (a,),
                 lambda g: (g - p * g.sum(axis=axis, keepdims=True),))


def nll_loss(log_probs: Tensor, targets, weights=None) -> Tensor:
    """Mean negative log-likelihood of integer ``targets`` under ``(B, C)`` log-probs."""
    targets = np.asarray(targets, dtype=np.int64)
    if log_probs.ndim != 2 or targets.shape != (log_probs.shape[0],):
        raise ShapeError(f"nll_loss: log-probs {log_probs.shape} vs targets {targets.shape}")
    rows = np.arange(len(targets))
    n = len(targets)
    value = -log_probs.data[rows, targets].sum() / n

    def grad_fn(g):
        out = np.zeros_like(log_probs.data)
        out[rows, targets] = -g / n
        return (out,)

    return _make("nll_loss", np.asarray(value, dtype=log_probs.dtype), (log_probs,), grad_fn)


def sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    shape = a.shape

    def grad_fn(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return _make("sum", np.asarray(a.data.sum(axis=axis, keepdims=keepdims)), (a,), grad_fn)


def mean(a: Tensor, axis=None) -> Tensor:
    count = a.data.size if axis is None else a.shape[axis]
    return mul(sum(a, axis=axis), 1.0 / count)


# -- model primitives --------------------------------------------------------


def embedding(table: Tensor, ids) -> Tensor:
    """Row lookup: ``table[ids]`` with scatter-add backward."""
    ids = np.asarray(ids, dtype=np.int64)
    if table.ndim != 2:
        raise ShapeError(f"embedding: table must be 2-D, got {table.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError(f"embedding: ids out of range for table {table.shape}")
    shape, dtype = table.shape, table.dtype

    def grad_fn(g):
        out = np.zeros(shape, dtype=dtype)
        np.add.at(out, ids.reshape(-1), g.reshape(-1, shape[1]))
        return (out,)

    return _make("embedding", table.data[ids], (table,), grad_fn)


def _same_padding(k: int) -> tuple[int, int]:
    left = (k - 1) // 2
    return left, k - 1 - left


def conv1d(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Length-preserving 1-D convolution over the time axis.

    x: (B, T, d); weight: (k, d, f); bias: (f,).  Output (B, T, f) with
    ``out[b, t] = sum_j xpad[b, t + j] @ weight[j] + bias`` where ``xpad`` is
    zero-padded by ``(k-1)//2`` on the left and the remainder on the right.
    """
    if x.ndim != 3 or weight.ndim != 3 or weight.shape[1] != x.shape[2] or bias.shape != (weight.shape[2],):
        raise ShapeError(f"conv1d: input {x.shape}, weight {weight.shape}, bias {bias.shape} do not conform")
    k = weight.shape[0]
    left, right = _same_padding(k)
    B, T, d = x.shape
    xpad = np.pad(x.data, ((0, 0), (left, right), (0, 0)))
    # windows: (B, T, k, d)
    cols = np.stack([xpad[:, j:j + T, :] for j in range(k)], axis=2)
    w2 = weight.data.reshape(k * d, -1)
    out = cols.reshape(B, T, k * d) @ w2 + bias.data

    def grad_fn(g):
        gw = (cols.reshape(-1, k * d).T @ g.reshape(-1, g.shape[-1])).reshape(weight.shape)
        gb = g.reshape(-1, g.shape[-1]).sum(axis=0)
        gcols = (g @ w2.T).reshape(B, T, k, d)
        gpad = np.zeros_like(xpad)
        for j in range(k):
            gpad[:, j:j + T, :] += gcols[:, :, j, :]
        return gpad[:, left:left + T, :], gw, gb

    return _make("conv1d", out, (x, weight, bias), grad_fn)


def masked_max(x: Tensor, mask) -> Tensor:
    """Elementwise max over the rows of ``x`` selected by ``mask``.

    x: (..., T, d); mask: boolean (..., T).  Returns (..., d).  A row set
    that is empty yields zeros.  The gradient goes to the lowest-index
    maximizer of each output coordinate.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape[:-1]:
        raise ShapeError(f"masked_max: input {x.shape} and mask {mask.shape} do not conform")
    filled = np.where(mask[..., None], x.data, -np.inf)
    arg = np.argmax(filled, axis=-2)  # first maximizer on ties
    nonempty = mask.any(axis=-1)[..., None]
    picked = np.take_along_axis(x.data, arg[..., None, :], axis=-2)[..., 0, :]
    out = np.where(nonempty, picked, 0).astype(x.dtype, copy=False)
    shape = x.shape

    def grad_fn(g):
        gx = np.zeros(shape, dtype=g.dtype)
        np.put_along_axis(gx, arg[..., None, :], (g * nonempty)[..., None, :], axis=-2)
        return (gx,)

    return _make("masked_max", out, (x,), grad_fn, mask=mask)
