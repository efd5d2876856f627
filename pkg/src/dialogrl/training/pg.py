"""REINFORCE and advantage actor-critic updates over recorded episodes.

A trace records, for each side, the negative log-probability of every
sampled action on that side's tape.  Minimizing ``sum_k nll_k * w_k`` with
constant weights ``w_k`` ascends ``sum_k log pi(a_k|s_k) * w_k``, the
likelihood-ratio estimator with ``w_k = R_k`` (REINFORCE) or
``w_k = R_k - V(s_k)`` (A2C).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import nn
from .reward import returns

SIDES = ("agent", "user")


class PolicyModeError(ValueError):
    """The side being updated did not sample its actions."""


def _side(trace, which: str):
    if which not in SIDES:
        raise ValueError(f"which must be one of {SIDES}")
    mode = trace.agent_mode if which == "agent" else trace.user_mode
    if mode != "softmax":
        raise PolicyModeError(f"{which} actions were chosen greedily; the log-prob gradient is invalid")
    tape = trace.agent_tape if which == "agent" else trace.user_tape
    nlls = trace.agent_nlls if which == "agent" else trace.user_nlls
    if tape is None or any(n is None for n in nlls):
        raise PolicyModeError(f"trace has no recorded {which} graph; roll out with record=({which!r},)")
    return tape, nlls


def _param_list(params) -> list:
    return params.parameters() if isinstance(params, nn.Module) else list(params)


def trace_returns(trace, gamma: float) -> np.ndarray:
    return returns(trace.rewards, trace.bonus, gamma)


def accumulate_policy_gradient(trace, which: str, weights, scale: float = 1.0) -> float:
    """Back-propagate ``scale * sum_k nll_k * weights[k]`` into the side's parameters.

    Returns the surrogate value ``-sum_k log pi_k * w_k``.
    """
    tape, nlls = _side(trace, which)
    w = np.asarray(weights, dtype=np.float64) * scale
    loss = nn.weighted_sum(nlls, w, tape)
    nn.backward(tape, loss)
    return float(loss.value)


class MovingBaseline:
    """Exponential moving average of observed returns."""

    def __init__(self, decay: float = 0.99):
        self.decay = decay
        self.value = 0.0
        self.n = 0

    def update(self, rs) -> None:
        for r in np.ravel(rs):
            self.value = r if self.n == 0 else self.decay * self.value + (1 - self.decay) * r
            self.n += 1


def reinforce_update(traces, which: str, params, cfg, opt: nn.AdamState,
                     baseline: MovingBaseline | None = None) -> None:
    """One ascent step on the mean over ``traces`` of sum_k grad log pi * (R_k - b)."""
    ps = _param_list(params)
    traces = list(traces)
    for tr in traces:
        _side(tr, which)
    nn.zero_grads(ps)
    for tr in traces:
        R = trace_returns(tr, cfg.gamma)
        b = baseline.value if baseline is not None and baseline.n else 0.0
        accumulate_policy_gradient(tr, which, R - b, 1.0 / len(traces))
        if baseline is not None:
            baseline.update(R)
    if cfg.clip > 0:
        nn.clip_grad_norm(ps, cfg.clip)
    nn.adam_step(ps, opt)


class ValueNet(nn.Module):
    """State-value estimate from the concatenated agent and user dialog states."""

    def __init__(self, name: str, n_in: int, n_hidden: int, rng):
        self.mlp = nn.MLP(name, n_in, n_hidden, 1, rng, output="identity")

    def __call__(self, x, tape=None) -> nn.Tensor:
        x = x if isinstance(x, nn.Tensor) else nn.Tensor(x)
        return self.mlp(x, tape)


def value_inputs(trace, which: str = "agent") -> np.ndarray:
    """(turns, dim) matrix of concat(h_agent, h_user) at each of ``which``'s decisions.

    The user speaks first, so at its turn-k decision the agent has not yet
    heard the turn-k utterance: the user side pairs the agent state of turn
    k-1 (zeros, the initial state, at k=1) with its own turn-k state.  Using
    the agent's turn-k state there would leak the user's action into its own
    baseline and bias the gradient.  No gradient flows back into either state.
    """
    agent = trace.agent_features
    if which == "user":
        agent = [np.zeros_like(agent[0])] + list(agent[:-1])
    return np.stack([np.concatenate([a, u]) for a, u in zip(agent, trace.user_features)])


def advantages(trace, value_net: ValueNet, gamma: float, which: str = "agent") -> np.ndarray:
    V = value_net(value_inputs(trace, which)).value[:, 0]
    return trace_returns(trace, gamma) - V


def value_regression_step(traces, value_net: ValueNet, gamma: float, opt: nn.AdamState,
                          clip: float = 0.0, which: str = "agent") -> float:
    """One Adam step on the mean squared error between V(s_k) and R_k; returns the pre-step MSE."""
    ps = value_net.parameters()
    nn.zero_grads(ps)
    traces = list(traces)
    total, count = 0.0, sum(t.turns for t in traces)
    for tr in traces:
        tape = nn.Tape()
        V = value_net(value_inputs(tr, which), tape)
        R = trace_returns(tr, gamma)
        err = nn.square_error(V, R[:, None], tape)
        loss = nn.scale(err, 1.0 / count, tape)
        nn.backward(tape, loss)
        total += float(err.value)
    if clip > 0:
        nn.clip_grad_norm(ps, clip)
    nn.adam_step(ps, opt)
    return total / count


def a2c_update(traces, which: str, params, value_net: ValueNet, cfg, opt: nn.AdamState,
               value_opt: nn.AdamState) -> None:
    """Policy step with advantages from the current (detached) value net, then a value regression step."""
    ps = _param_list(params)
    traces = list(traces)
    for tr in traces:
        _side(tr, which)
    nn.zero_grads(ps)
    for tr in traces:
        accumulate_policy_gradient(tr, which, advantages(tr, value_net, cfg.gamma, which), 1.0 / len(traces))
    if cfg.clip > 0:
        nn.clip_grad_norm(ps, cfg.clip)
    nn.adam_step(ps, opt)
    value_regression_step(traces, value_net, cfg.gamma, value_opt, cfg.clip, which)


@dataclass
class SideLearner:
    """Everything needed to update one side: its trainable parameters and optimizer state."""

    params: list
    opt: nn.AdamState
    value_net: ValueNet | None = None
    value_opt: nn.AdamState | None = None
    baseline: MovingBaseline | None = None

    def update(self, traces, which: str, cfg) -> None:
        if cfg.algorithm == "a2c":
            a2c_update(traces, which, self.params, self.value_net, cfg, self.opt, self.value_opt)
        else:
            reinforce_update(traces, which, self.params, cfg, self.opt, self.baseline)
