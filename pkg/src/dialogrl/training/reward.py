from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ScoreFunction:
    w_inf: float = 0.5
    w_req: float = 0.5

    def __post_init__(self):
        if self.w_inf < 0 or self.w_req < 0 or abs(self.w_inf + self.w_req - 1.0) > 1e-12:
            raise ValueError("score weights must be non-negative and sum to 1")


def score(goal, belief: dict, fulfilled, sf: ScoreFunction = ScoreFunction(),
          entity_resolved: bool = False) -> float:
    """Task-progress score in [0, 1]: matched goal constraints and answered requests."""
    inf = goal.informables
    matched = sum(1 for s, v in inf.items() if belief.get(s) == v)
    inf_part = matched / len(inf) if inf else 1.0
    if goal.requests:
        req_part = len(set(fulfilled) & goal.requests) / len(goal.requests)
    else:
        req_part = 1.0 if entity_resolved else 0.0
    return sf.w_inf * inf_part + sf.w_req * req_part


def turn_reward(score_k: float, score_prev: float) -> float:
    return score_k - score_prev


def returns(rewards: Sequence[float], terminal_bonus: float, gamma: float) -> np.ndarray:
    """Discounted reward-to-go with ``terminal_bonus`` added to the last reward."""
    if len(rewards) == 0:
        raise ValueError("rewards must be non-empty")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    r = np.asarray(rewards, dtype=np.float64).copy()
    r[-1] += terminal_bonus
    out = np.empty_like(r)
    acc = 0.0
    for k in range(len(r) - 1, -1, -1):
        acc = r[k] + gamma * acc
        out[k] = acc
    return out
