"""Central finite-difference gradient checking."""
from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .tensor import Parameter


def numeric_grad(loss_fn: Callable[[], float], p: Parameter, eps: float = 1e-5,
                 indices=None) -> dict:
    """Finite-difference gradient of ``loss_fn`` w.r.t. selected entries of ``p``."""
    flat = p.value.reshape(-1)
    indices = range(flat.size) if indices is None else indices
    out = {}
    for i in indices:
        old = flat[i]
        flat[i] = old + eps
        lp = loss_fn()
        flat[i] = old - eps
        lm = loss_fn()
        flat[i] = old
        out[i] = (lp - lm) / (2 * eps)
    return out


def relative_error(a: float, b: float, floor: float = 1e-7) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


def check_gradients(loss_and_backward: Callable[[], float], loss_fn: Callable[[], float],
                    params: Iterable[Parameter], eps: float = 1e-5, max_entries: int | None = 12,
                    rng: np.random.Generator | None = None, floor: float = 1e-7) -> float:
    """Return the worst relative error between analytic and numeric gradients.

    ``loss_and_backward`` must zero, then populate ``p.grad`` for every parameter.
    ``max_entries`` limits the number of sampled entries per parameter.
    ``floor`` bounds the denominator of the relative error: central
    differences carry roughly ``machine_eps * |loss| / eps`` of roundoff, so
    entries much smaller than that over the tolerance cannot be resolved.
    """
    params = list(params)
    loss_and_backward()
    analytic = {p.id: p.grad.copy() for p in params}
    rng = rng or np.random.default_rng(0)
    worst = 0.0
    for p in params:
        n = p.value.size
        if max_entries is None or n <= max_entries:
            idx = range(n)
        else:
            idx = rng.choice(n, size=max_entries, replace=False)
        num = numeric_grad(loss_fn, p, eps, idx)
        flat = analytic[p.id].reshape(-1)
        for i, g in num.items():
            worst = max(worst, relative_error(flat[i], g, floor))
    return worst
