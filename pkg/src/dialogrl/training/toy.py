"""Tiny environments for checking the policy-gradient machinery.

Both produce :class:`EpisodeTrace` objects whose agent side is a tabular
softmax policy, so :func:`reinforce_update` runs on them unchanged.  The
agent features are a one-hot of the decision point (user features are
empty), which is what the A2C value net reads.  In the two-turn MDP those
are turn 1, turn 2 in state 0 and turn 2 in state 1.
"""
from __future__ import annotations

import numpy as np

from .. import nn
from .rollout import EpisodeTrace


class TabularPolicy(nn.Module):
    """Independent softmax over actions for each discrete state."""

    def __init__(self, n_states: int, n_actions: int, logits=None):
        init = np.zeros((n_states, n_actions)) if logits is None else np.array(logits, dtype=np.float64)
        self.logits = nn.Parameter("policy.logits", init)

    def dist(self, state: int, tape=None) -> nn.Tensor:
        return nn.softmax(nn.embed_one(self.logits, state, tape), tape)

    def probs(self) -> np.ndarray:
        z = self.logits.value - self.logits.value.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)


def _act(policy: TabularPolicy, state: int, tape, rng) -> tuple[int, nn.Tensor]:
    d = policy.dist(state, tape)
    a = int(rng.choice(len(d.value), p=d.value))
    return a, nn.cross_entropy(d, a, tape)


def bandit_episode(policy: TabularPolicy, rewards, rng: np.random.Generator) -> EpisodeTrace:
    """One-turn dialog: a single agent action earns ``rewards[action]``."""
    tr = EpisodeTrace(None, "softmax", "softmax")
    tape = tr.agent_tape = nn.Tape()
    a, nll = _act(policy, 0, tape, rng)
    tr.rewards.append(float(rewards[a]))
    tr.agent_nlls.append(nll)
    tr.agent_actions.append(a)
    tr.agent_features.append(np.ones(1))
    tr.user_features.append(np.zeros(0))
    return tr


class ToyDialogMDP:
    """Two turns, two states, two actions.

    Turn 1 starts in state 0 and pays ``r1[a]``; the next state equals the
    chosen action with probability ``p_follow`` and is the other state
    otherwise.  Turn 2 pays ``r2[s, a]`` and ends the episode.
    """

    def __init__(self, r1=(0.2, 0.5), r2=((1.0, 0.0), (0.0, 0.6)), p_follow: float = 0.75):
        self.r1 = np.asarray(r1, dtype=np.float64)
        self.r2 = np.asarray(r2, dtype=np.float64)
        self.p_follow = p_follow

    def transition(self, a: int) -> np.ndarray:
        p = np.full(2, 1.0 - self.p_follow)
        p[a] = self.p_follow
        return p

    def episode(self, policy: TabularPolicy, rng: np.random.Generator) -> EpisodeTrace:
        tr = EpisodeTrace(None, "softmax", "softmax")
        tape = tr.agent_tape = nn.Tape()
        a1, nll1 = _act(policy, 0, tape, rng)
        s2 = int(rng.choice(2, p=self.transition(a1)))
        a2, nll2 = _act(policy, s2, tape, rng)
        tr.rewards += [float(self.r1[a1]), float(self.r2[s2, a2])]
        tr.agent_nlls += [nll1, nll2]
        tr.agent_actions += [a1, a2]
        tr.agent_features += [np.eye(3)[0], np.eye(3)[1 + s2]]
        tr.user_features += [np.zeros(0), np.zeros(0)]
        return tr
