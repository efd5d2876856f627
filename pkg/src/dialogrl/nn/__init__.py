"""Minimal reverse-mode differentiation engine on numpy arrays."""
from .tensor import DimensionError, Parameter, Tape, TapeError, Tensor, backward, zero_grads
from .functional import (
    add, add_scalars, concat, constant, cross_entropy, detach, dropout, embed, embed_one, scale,
    softmax, square_error, stack, tanh, total, weighted_sum,
)
from .layers import (
    DenseLayer, Embedding, EmptyUtteranceError, LstmCell, MLP, Module, bilstm_encode,
    dense_forward, linear, lstm_step,
)
from .optim import AdamState, adam_step, clip_grad_norm
from . import checkpoint

__all__ = [
    "AdamState", "DenseLayer", "DimensionError", "Embedding", "EmptyUtteranceError", "LstmCell",
    "MLP", "Module", "Parameter", "Tape", "TapeError", "Tensor", "adam_step", "add",
    "add_scalars", "backward", "bilstm_encode", "checkpoint", "clip_grad_norm", "concat",
    "constant", "cross_entropy", "dense_forward", "detach", "dropout", "embed", "embed_one", "linear",
    "lstm_step", "scale", "softmax", "square_error", "stack", "tanh", "total", "weighted_sum",
    "zero_grads",
]
