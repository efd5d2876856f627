"""Dense arrays with define-by-run reverse-mode gradient recording.

A :class:`Tape` is rebuilt for every forward pass. Operations that receive
``tape=None`` run in inference mode and record nothing.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when operand shapes do not line up."""


class TapeError(RuntimeError):
    pass


class Tensor:
    """A float64 array that may take part in a recorded computation."""

    __slots__ = ("value", "__weakref__")

    def __init__(self, value):
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def shape(self) -> tuple:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def item(self) -> float:
        return float(self.value.reshape(-1)[0]) if self.value.size == 1 else float("nan")

    def __len__(self):
        return len(self.value)

    def __repr__(self):
        return f"Tensor(shape={self.shape})"


class Parameter(Tensor):
    """A trainable tensor with a persistent gradient accumulator."""

    __slots__ = ("id", "grad")

    def __init__(self, id: str, value):
        super().__init__(np.array(value, dtype=np.float64))
        self.id = id
        self.grad = np.zeros_like(self.value)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def __repr__(self):
        return f"Parameter({self.id!r}, shape={self.shape})"


BackwardFn = Callable[[list], Sequence]


class Tape:
    """Ordered record of primitive operations.

    Each entry holds the input tensors, the output tensors and a closure that
    maps output gradients to input gradients. Recording order is topological
    by construction since an op can only consume tensors that already exist.
    """

    def __init__(self):
        self.ops: list[tuple[tuple, tuple, BackwardFn]] = []
        self._produced: set[int] = set()

    def record(self, inputs: Sequence[Tensor], outputs: Sequence[Tensor], backward_fn: BackwardFn) -> None:
        outputs = tuple(outputs)
        self.ops.append((tuple(inputs), outputs, backward_fn))
        for t in outputs:
            self._produced.add(id(t))

    def __len__(self):
        return len(self.ops)

    def produced(self, t: Tensor) -> bool:
        return id(t) in self._produced


def backward(tape: Tape, loss: Tensor) -> None:
    """Accumulate d(loss)/d(param) into ``param.grad`` for every reachable Parameter."""
    if loss.size != 1:
        raise TapeError(f"loss must be a scalar, got shape {loss.shape}")
    if not tape.produced(loss):
        raise TapeError("loss was not produced on this tape")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.value)}
    for inputs, outputs, fn in reversed(tape.ops):
        out_grads = [grads.get(id(o)) for o in outputs]
        if all(g is None for g in out_grads):
            continue
        out_grads = [np.zeros_like(o.value) if g is None else g for o, g in zip(outputs, out_grads)]
        in_grads = fn(out_grads)
        for t, g in zip(inputs, in_grads):
            if g is None:
                continue
            if isinstance(t, Parameter):
                t.grad += g
            else:
                prev = grads.get(id(t))
                grads[id(t)] = g if prev is None else prev + g


def zero_grads(params) -> None:
    for p in params:
        p.zero_grad()
