"""Dense layers, LSTM cells and the bidirectional utterance encoder."""
from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from . import functional as F
from .functional import sigmoid
from .tensor import DimensionError, Parameter, Tape, Tensor

ACTIVATIONS = ("identity", "tanh", "softmax")


def glorot(rng: np.random.Generator, n_out: int, n_in: int) -> np.ndarray:
    lim = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-lim, lim, size=(n_out, n_in))


class Module:
    """Anything that owns Parameters."""

    def parameters(self) -> list[Parameter]:
        out = []
        for v in self.__dict__.values():
            if isinstance(v, Parameter):
                out.append(v)
            elif isinstance(v, Module):
                out.extend(v.parameters())
            elif isinstance(v, (dict, list, tuple)):
                for m in (v.values() if isinstance(v, dict) else v):
                    if isinstance(m, Module):
                        out.extend(m.parameters())
        return out

    def named_parameters(self) -> dict[str, Parameter]:
        return {p.id: p for p in self.parameters()}

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()


class DenseLayer(Module):
    def __init__(self, name: str, n_in: int, n_out: int, activation: str = "identity",
                 rng: np.random.Generator | None = None):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        rng = rng or np.random.default_rng(0)
        self.W = Parameter(f"{name}.W", glorot(rng, n_out, n_in))
        self.b = Parameter(f"{name}.b", np.zeros(n_out))
        self.activation = activation

    @property
    def n_in(self) -> int:
        return self.W.shape[1]

    @property
    def n_out(self) -> int:
        return self.b.shape[0]


def linear(x: Tensor, W: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if x.value.shape[-1] != W.value.shape[1]:
        raise DimensionError(
            f"input of shape {x.shape} does not match weight of shape {W.shape}")
    xv, Wv = x.value, W.value
    out = Tensor(xv @ Wv.T + b.value)
    if tape is not None:
        def bw(gs):
            g = gs[0]
            if xv.ndim == 1:
                return [Wv.T @ g, np.outer(g, xv), g]
            return [g @ Wv, g.T @ xv, g.sum(axis=0)]

        tape.record([x, W, b], [out], bw)
    return out


def dense_forward(x: Tensor, layer: DenseLayer, tape: Tape | None = None) -> Tensor:
    z = linear(x, layer.W, layer.b, tape)
    if layer.activation == "tanh":
        return F.tanh(z, tape)
    if layer.activation == "softmax":
        return F.softmax(z, tape)
    return z


class MLP(Module):
    """One tanh hidden layer followed by a softmax (or identity) output layer."""

    def __init__(self, name: str, n_in: int, n_hidden: int, n_out: int, rng, output: str = "softmax"):
        self.hidden = DenseLayer(f"{name}.hidden", n_in, n_hidden, "tanh", rng)
        self.out = DenseLayer(f"{name}.out", n_hidden, n_out, output, rng)

    def __call__(self, x: Tensor, tape: Tape | None = None, *, dropout: float = 0.0,
                 training: bool = False, rng=None) -> Tensor:
        h = dense_forward(x, self.hidden, tape)
        h = F.dropout(h, dropout, training, rng, tape)
        return dense_forward(h, self.out, tape)


class Embedding(Module):
    def __init__(self, name: str, n: int, dim: int, rng):
        self.table = Parameter(f"{name}.table", rng.uniform(-0.1, 0.1, size=(n, dim)))

    def __call__(self, ids: Sequence[int], tape: Tape | None = None) -> Tensor:
        return F.embed(self.table, ids, tape)

    def row(self, i: int, tape: Tape | None = None) -> Tensor:
        return F.embed_one(self.table, i, tape)


class LstmCell(Module):
    """Gate order inside the stacked weight: input, forget, output, candidate."""

    def __init__(self, name: str, input_size: int, hidden_size: int, rng):
        H = hidden_size
        self.W = Parameter(f"{name}.W", rng.uniform(-0.08, 0.08, size=(4 * H, input_size + H)))
        b = np.zeros(4 * H)
        b[H:2 * H] = 1.0
        self.b = Parameter(f"{name}.b", b)
        self.input_size = input_size
        self.hidden_size = hidden_size

    def zero_state(self) -> tuple[Tensor, Tensor]:
        return Tensor(np.zeros(self.hidden_size)), Tensor(np.zeros(self.hidden_size))


def _cell_forward(W, b, x, h, c, H):
    xh = np.concatenate((x, h))
    z = W @ xh + b
    i = sigmoid(z[:H])
    f = sigmoid(z[H:2 * H])
    o = sigmoid(z[2 * H:3 * H])
    g = np.tanh(z[3 * H:])
    c2 = f * c + i * g
    tc = np.tanh(c2)
    return o * tc, c2, (xh, i, f, o, g, c, tc)


def _cell_backward(W, dh, dc, cache, H):
    xh, i, f, o, g, c, tc = cache
    dc = dc + dh * o * (1.0 - tc * tc)
    dz = np.concatenate((
        dc * g * i * (1.0 - i),
        dc * c * f * (1.0 - f),
        dh * tc * o * (1.0 - o),
        dc * i * (1.0 - g * g),
    ))
    dxh = W.T @ dz
    return dz, dxh, dc * f


def _check_cell(cell: LstmCell, x: np.ndarray, h: np.ndarray, c: np.ndarray) -> None:
    if x.shape != (cell.input_size,):
        raise DimensionError(f"lstm input of shape {x.shape}, cell expects ({cell.input_size},)")
    if h.shape != (cell.hidden_size,) or c.shape != (cell.hidden_size,):
        raise DimensionError(
            f"lstm state shapes {h.shape}/{c.shape}, cell expects ({cell.hidden_size},)")


def lstm_step(cell: LstmCell, x: Tensor, h_prev: Tensor, c_prev: Tensor,
              tape: Tape | None = None) -> tuple[Tensor, Tensor]:
    _check_cell(cell, x.value, h_prev.value, c_prev.value)
    H, I = cell.hidden_size, cell.input_size
    W = cell.W.value
    hv, cv, cache = _cell_forward(W, cell.b.value, x.value, h_prev.value, c_prev.value, H)
    h, c = Tensor(hv), Tensor(cv)
    if tape is not None:
        def bw(gs):
            dz, dxh, dc_prev = _cell_backward(W, gs[0], gs[1], cache, H)
            return [dxh[:I], dxh[I:], dc_prev, np.outer(dz, cache[0]), dz]

        tape.record([x, h_prev, c_prev, cell.W, cell.b], [h, c], bw)
    return h, c


def _run_sequence(cell: LstmCell, X: np.ndarray, keep: bool):
    H = cell.hidden_size
    W, b = cell.W.value, cell.b.value
    h = np.zeros(H)
    c = np.zeros(H)
    caches = []
    for t in range(X.shape[0]):
        h, c, cache = _cell_forward(W, b, X[t], h, c, H)
        if keep:
            caches.append(cache)
    return h, caches


def _backprop_sequence(cell: LstmCell, dh_last: np.ndarray, caches, order) -> tuple:
    H, I = cell.hidden_size, cell.input_size
    W = cell.W.value
    dW = np.zeros_like(W)
    db = np.zeros(4 * H)
    dX = np.zeros((len(caches), I))
    dh, dc = dh_last, np.zeros(H)
    for step in range(len(caches) - 1, -1, -1):
        dz, dxh, dc = _cell_backward(W, dh, dc, caches[step], H)
        dW += np.outer(dz, caches[step][0])
        db += dz
        dX[order[step]] = dxh[:I]
        dh = dxh[I:]
    return dX, dW, db


class EmptyUtteranceError(ValueError):
    pass


def bilstm_encode(tokens, fwd: LstmCell, bwd: LstmCell, tape: Tape | None = None) -> Tensor:
    """Concatenate the forward state after the last token with the backward state after the first.

    ``tokens`` is either a (T, dim) tensor or a sequence of 1-D embedding tensors.
    """
    if isinstance(tokens, Tensor):
        X = tokens
    else:
        tokens = list(tokens)
        if not tokens:
            raise EmptyUtteranceError("cannot encode an empty token sequence")
        X = F.stack(tokens, tape)
    if X.value.ndim != 2 or X.value.shape[0] == 0:
        raise EmptyUtteranceError("cannot encode an empty token sequence")
    if X.value.shape[1] != fwd.input_size or X.value.shape[1] != bwd.input_size:
        raise DimensionError(
            f"token dim {X.value.shape[1]} does not match cell input sizes "
            f"{fwd.input_size}/{bwd.input_size}")
    Xv = X.value
    T = Xv.shape[0]
    keep = tape is not None
    hf, cf = _run_sequence(fwd, Xv, keep)
    hb, cb = _run_sequence(bwd, Xv[::-1], keep)
    out = Tensor(np.concatenate((hf, hb)))
    if keep:
        Hf = fwd.hidden_size

        def bw(gs):
            g = gs[0]
            dXf, dWf, dbf = _backprop_sequence(fwd, g[:Hf], cf, range(T))
            dXb, dWb, dbb = _backprop_sequence(bwd, g[Hf:], cb, range(T - 1, -1, -1))
            return [dXf + dXb, dWf, dbf, dWb, dbb]

        tape.record([X, fwd.W, fwd.b, bwd.W, bwd.b], [out], bw)
    return out


def iter_parameters(*modules: Module) -> Iterator[Parameter]:
    for m in modules:
        yield from m.parameters()
