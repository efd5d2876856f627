"""Observation and decision records exchanged between the simulator and the policies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn


@dataclass
class UserObservation:
    turn: int
    prev_user_utt: list
    agent_utt: list
    agent_act: str | None
    entity: object
    n_results: int
    fulfilled: frozenset


@dataclass
class AgentObservation:
    turn: int
    prev_agent_utt: list
    user_utt: list
    kb_flag: int
    user_act: str
    user_slots: dict
    n_results: int


@dataclass
class UserDecision:
    act: str
    action_id: int
    slots: dict
    nll: nn.Tensor | None = None
    features: np.ndarray | None = None


@dataclass
class AgentDecision:
    act: str
    action_id: int
    belief: dict
    pointer_dist: np.ndarray
    nll: nn.Tensor | None = None
    features: np.ndarray | None = None
    belief_dists: dict | None = None
