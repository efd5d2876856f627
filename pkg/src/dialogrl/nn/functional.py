"""Primitive differentiable operations.

Every function takes an optional ``tape``. With ``tape=None`` nothing is
recorded and the call is a plain numpy evaluation.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .tensor import DimensionError, Tape, Tensor

_TINY = 1e-300


def _rec(tape, inputs, outputs, fn):
    if tape is not None:
        tape.record(inputs, outputs, fn)


def sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign to avoid exp overflow
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def constant(value) -> Tensor:
    return Tensor(value)


def concat(parts: Sequence[Tensor], tape: Tape | None = None) -> Tensor:
    parts = list(parts)
    sizes = [p.value.shape[-1] for p in parts]
    out = Tensor(np.concatenate([p.value for p in parts], axis=-1))

    def bw(gs):
        g = gs[0]
        offs = np.cumsum([0] + sizes)
        return [g[..., offs[i]:offs[i + 1]] for i in range(len(parts))]

    _rec(tape, parts, [out], bw)
    return out


def stack(parts: Sequence[Tensor], tape: Tape | None = None) -> Tensor:
    parts = list(parts)
    out = Tensor(np.stack([p.value for p in parts]))
    _rec(tape, parts, [out], lambda gs: [gs[0][i] for i in range(len(parts))])
    return out


def add(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"add: shapes {a.shape} and {b.shape} differ")
    out = Tensor(a.value + b.value)
    _rec(tape, [a, b], [out], lambda gs: [gs[0], gs[0]])
    return out


def scale(a: Tensor, k: float, tape: Tape | None = None) -> Tensor:
    out = Tensor(a.value * k)
    _rec(tape, [a], [out], lambda gs: [gs[0] * k])
    return out


def total(a: Tensor, tape: Tape | None = None) -> Tensor:
    """Sum of all elements, as a scalar tensor."""
    out = Tensor(np.array(a.value.sum()))
    _rec(tape, [a], [out], lambda gs: [np.full_like(a.value, float(gs[0]))])
    return out


def add_scalars(terms: Sequence[Tensor], tape: Tape | None = None) -> Tensor:
    terms = list(terms)
    out = Tensor(np.array(sum(float(t.value) for t in terms)))
    _rec(tape, terms, [out], lambda gs: [gs[0] for _ in terms])
    return out


def weighted_sum(terms: Sequence[Tensor], weights: Sequence[float], tape: Tape | None = None) -> Tensor:
    """Scalar ``sum_i w_i * t_i`` over scalar tensors, weights treated as constants."""
    terms = list(terms)
    weights = [float(w) for w in weights]
    out = Tensor(np.array(sum(w * float(t.value) for t, w in zip(terms, weights))))
    _rec(tape, terms, [out], lambda gs: [gs[0] * w for w in weights])
    return out


def square_error(pred: Tensor, target: float, tape: Tape | None = None) -> Tensor:
    diff = pred.value - target
    out = Tensor(np.array(float(np.sum(diff * diff))))
    _rec(tape, [pred], [out], lambda gs: [2.0 * diff * gs[0]])
    return out


def tanh(x: Tensor, tape: Tape | None = None) -> Tensor:
    y = np.tanh(x.value)
    out = Tensor(y)
    _rec(tape, [x], [out], lambda gs: [gs[0] * (1.0 - y * y)])
    return out


def softmax(logits: Tensor, tape: Tape | None = None) -> Tensor:
    z = logits.value
    if z.ndim != 1 or z.size == 0:
        raise DimensionError(f"softmax expects a non-empty 1-D tensor, got shape {z.shape}")
    e = np.exp(z - z.max())
    p = e / e.sum()
    out = Tensor(p)

    def bw(gs):
        g = gs[0]
        return [p * (g - np.dot(g, p))]

    _rec(tape, [logits], [out], bw)
    return out


def cross_entropy(probs: Tensor, target_index: int, tape: Tape | None = None) -> Tensor:
    """``-log probs[target_index]`` as a scalar tensor."""
    n = probs.value.shape[-1]
    if not 0 <= target_index < n:
        raise IndexError(f"target index {target_index} out of range for {n} classes")
    p = max(float(probs.value[target_index]), _TINY)
    out = Tensor(np.array(-np.log(p)))

    def bw(gs):
        g = np.zeros_like(probs.value)
        g[target_index] = -float(gs[0]) / p
        return [g]

    _rec(tape, [probs], [out], bw)
    return out


def embed(table: Tensor, ids: Sequence[int], tape: Tape | None = None) -> Tensor:
    """Rows of ``table`` selected by ``ids`` as a (len(ids), dim) tensor."""
    idx = np.asarray(ids, dtype=np.int64)
    out = Tensor(table.value[idx])

    def bw(gs):
        g = np.zeros_like(table.value)
        np.add.at(g, idx, gs[0])
        return [g]

    _rec(tape, [table], [out], bw)
    return out


def embed_one(table: Tensor, i: int, tape: Tape | None = None) -> Tensor:
    """Row ``i`` of ``table`` as a 1-D tensor."""
    i = int(i)
    out = Tensor(table.value[i])

    def bw(gs):
        g = np.zeros_like(table.value)
        g[i] = gs[0]
        return [g]

    _rec(tape, [table], [out], bw)
    return out


def dropout(x: Tensor, p: float, training: bool, rng: np.random.Generator | None = None,
            tape: Tape | None = None) -> Tensor:
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must lie in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    mask = (rng.random(x.value.shape) >= p) / (1.0 - p)
    out = Tensor(x.value * mask)
    _rec(tape, [x], [out], lambda gs: [gs[0] * mask])
    return out


def detach(x: Tensor) -> Tensor:
    return Tensor(x.value.copy())
