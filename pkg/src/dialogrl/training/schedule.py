"""Alternating two-agent RL: within a cycle one side learns while the other is frozen."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import nn
from ..domain import sample_goal
from .config import RLConfig
from .pg import MovingBaseline, SideLearner, ValueNet
from .reward import ScoreFunction
from .rollout import RolloutConfig, run_episode


def rollout_config(cfg: RLConfig) -> RolloutConfig:
    return RolloutConfig(max_turns=cfg.max_turns, noise_p=cfg.noise_p,
                         score_fn=ScoreFunction(cfg.w_inf, cfg.w_req),
                         beta_succ=cfg.beta_succ, beta_fail=cfg.beta_fail)


def cycle_sides(cfg: RLConfig, n_cycles: int) -> list:
    """Which side learns in each cycle; joint training starts with the agent."""
    if cfg.mode == "agent-only":
        return ["agent"] * n_cycles
    return ["agent" if c % 2 == 0 else "user" for c in range(n_cycles)]


def trainable(wrapper, scope: str) -> list:
    return wrapper.params.act.parameters() if scope == "head" else wrapper.params.parameters()


@dataclass
class CycleStats:
    """Training-time (sampling policy) statistics of one cycle."""

    cycle: int
    side: str
    episodes: int
    success_rate: float
    avg_reward: float
    avg_success_turns: float | None


@dataclass
class TrainingLog:
    cycles: list = field(default_factory=list)
    curve: object = None


def make_learner(wrapper, cfg: RLConfig, value_in: int, rng, name: str) -> SideLearner:
    vn = vo = None
    if cfg.algorithm == "a2c":
        vn = ValueNet(f"value.{name}", value_in, cfg.value_hidden, rng)
        vo = nn.AdamState(lr=cfg.value_lr)
    base = MovingBaseline(cfg.baseline_decay) if cfg.baseline else None
    return SideLearner(trainable(wrapper, cfg.scope), nn.AdamState(lr=cfg.lr), vn, vo, base)


def _update(learner: SideLearner, batch: list, side: str, cfg: RLConfig) -> None:
    learner.update(batch, side, cfg)
    # drop the graphs, keep the statistics
    for t in batch:
        t.agent_tape = t.user_tape = None


def alternating_train(agent, user, domain, cfg: RLConfig, rng: np.random.Generator, *,
                      eval_every: int = 0, eval_n: int = 500, eval_rng=None,
                      on_cycle_end: Callable | None = None, goal_fn: Callable | None = None) -> TrainingLog:
    """Run ``cfg.total_episodes`` episodes in cycles of ``cfg.cycle_length``.

    Both sides sample their actions.  ``on_cycle_end(cycle, side)`` runs after
    every cycle (used to check the freeze contract).  With ``eval_every > 0``
    a learning curve point (greedy agent) is recorded before training and
    every ``eval_every`` episodes after, drawing from ``eval_rng`` so
    evaluation never perturbs training.
    """
    from ..harness.metrics import LearningCurve, evaluate

    rcfg = rollout_config(cfg)
    n_cycles = -(-cfg.total_episodes // cfg.cycle_length) if cfg.total_episodes else 0
    sides = cycle_sides(cfg, n_cycles)
    value_in = agent.params.cfg.dialog_hidden + user.params.cfg.dialog_hidden
    learners = {"agent": make_learner(agent, cfg, value_in, rng, "agent"),
                "user": make_learner(user, cfg, value_in, rng, "user")}
    wrappers = {"agent": agent, "user": user}
    goal_fn = goal_fn or (lambda r: sample_goal(domain.ontology, domain.kb, r))
    eval_rng = eval_rng if eval_rng is not None else np.random.default_rng(0)
    log = TrainingLog(curve=LearningCurve())
    done = 0
    if eval_every:
        log.curve.append(0, evaluate(agent, user, domain, eval_n, eval_rng, rcfg))
    for c, side in enumerate(sides):
        n = min(cfg.cycle_length, cfg.total_episodes - done)
        traces, batch = [], []
        for _ in range(n):
            tr = run_episode(agent, user, domain, goal_fn(rng), rcfg, rng,
                             agent_mode="softmax", user_mode="softmax", record=(side,))
            batch.append(tr)
            traces.append(tr)
            if len(batch) == cfg.episodes_per_update:
                _update(learners[side], batch, side, cfg)
                batch = []
            done += 1
            if eval_every and done % eval_every == 0:
                if cfg.scope == "full":
                    wrappers[side].clear_cache()
                log.curve.append(done, evaluate(agent, user, domain, eval_n, eval_rng, rcfg))
        if batch:
            _update(learners[side], batch, side, cfg)
        if cfg.scope == "full":
            wrappers[side].clear_cache()
        succ = [t.turns for t in traces if t.success]
        log.cycles.append(CycleStats(c, side, n, len(succ) / n, float(np.mean([t.total_reward for t in traces])),
                                     float(np.mean(succ)) if succ else None))
        if on_cycle_end is not None:
            on_cycle_end(c, side)
    return log
