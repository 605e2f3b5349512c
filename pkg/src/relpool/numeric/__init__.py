"""Tensors, reverse-mode autodiff, optimizer, regularizers and checkpoints."""

from . import tensor as ops
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .gradcheck import check_gradients, numeric_grad
from .module import Module, parameter
from .optim import SGD, MissingGradientError
from .regularize import dropconnect, dropout
from .tensor import (
    ShapeError,
    StaleTapeError,
    Tape,
    TapeNode,
    Tensor,
    backward,
    get_default_dtype,
    no_grad,
    precision,
)

__all__ = [
    "ops", "Tensor", "Tape", "TapeNode", "ShapeError", "StaleTapeError", "backward",
    "no_grad", "precision", "get_default_dtype", "SGD", "MissingGradientError",
    "dropout", "dropconnect", "Module", "parameter", "save_checkpoint",
    "load_checkpoint", "CheckpointError", "check_gradients", "numeric_grad",
]
