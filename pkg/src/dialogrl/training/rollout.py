"""Simulated dialogs between an agent policy and a user policy.

Both sides are driven through the same small protocol so that neural and
scripted policies are interchangeable::

    session = agent.start(rng)               # or user.start(goal)
    decision = session.act(observation, tape, mode, rng)

A turn is one user utterance followed by one agent response.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import nn
from ..agent import build_api_call, resolve_entity
from ..domain import API_CALL, NONE, check_success, query_kb
from ..domain.synthetic import DISTRACTORS
from ..language import RenderError, render, tokenize
from ..protocol import AgentObservation, UserObservation
from .reward import ScoreFunction, score, turn_reward

MODES = ("softmax", "greedy")


@dataclass
class RolloutConfig:
    max_turns: int = 20
    noise_p: float = 0.1
    score_fn: ScoreFunction = field(default_factory=ScoreFunction)
    beta_succ: float = 1.0
    beta_fail: float = -1.0


@dataclass
class EpisodeTrace:
    goal: object
    agent_mode: str
    user_mode: str
    rewards: list = field(default_factory=list)
    scores: list = field(default_factory=list)
    agent_nlls: list = field(default_factory=list)
    user_nlls: list = field(default_factory=list)
    agent_actions: list = field(default_factory=list)
    user_actions: list = field(default_factory=list)
    agent_features: list = field(default_factory=list)
    user_features: list = field(default_factory=list)
    agent_tape: nn.Tape | None = None
    user_tape: nn.Tape | None = None
    transcript: list = field(default_factory=list)
    success: bool = False
    bonus: float = 0.0

    @property
    def turns(self) -> int:
        return len(self.rewards)

    @property
    def total_reward(self) -> float:
        """Undiscounted turn rewards plus the terminal bonus."""
        return float(sum(self.rewards)) + self.bonus


def add_noise(tokens: list, p: float, rng: np.random.Generator) -> list:
    if p <= 0 or rng.random() >= p:
        return tokens
    pos = int(rng.integers(len(tokens) + 1))
    word = DISTRACTORS[int(rng.integers(len(DISTRACTORS)))]
    return tokens[:pos] + [word] + tokens[pos:]


class AgentWorld:
    """KB results, entity and fulfilled requests as seen from the agent's side of a dialog."""

    def __init__(self, domain):
        self.domain = domain
        self.results: list = []
        self.kb_flag = 0
        self.entity = None
        self.fulfilled: set = set()
        self._requestable = set(domain.ontology.requestable)

    def apply(self, ad, rng) -> dict:
        """Carry out an agent decision; returns the call, pointer and rendered tokens."""
        call = None
        if ad.act == API_CALL:
            api = build_api_call(ad.belief)
            call = dict(api.constraints)
            self.results, self.kb_flag = query_kb(self.domain.kb, api)
        self.entity, pointer = resolve_entity(ad.pointer_dist, self.results, "greedy", rng)
        slots = ad.belief if ad.act == API_CALL else {}
        try:
            text = render(ad.act, slots, self.entity, self.domain.agent_templates, rng)
        except RenderError:
            text = render("canthelp", {}, None, self.domain.agent_templates, rng)
        slot = ad.act.partition("_")[2]
        if ad.act.startswith("inform_") and slot in self._requestable and self.entity is not None:
            self.fulfilled.add(slot)
        return {"api_call": call, "pointer": pointer, "utt": tokenize(text)}


def run_episode(agent, user, domain, goal, cfg: RolloutConfig, rng: np.random.Generator, *,
                agent_mode: str = "softmax", user_mode: str = "softmax",
                record: tuple = ()) -> EpisodeTrace:
    """Roll out one dialog; ``record`` names the sides ("agent", "user") whose graph is taped."""
    if agent_mode not in MODES or user_mode not in MODES:
        raise ValueError(f"policy modes must be one of {MODES}")
    trace = EpisodeTrace(goal, agent_mode, user_mode)
    a_tape = trace.agent_tape = nn.Tape() if "agent" in record else None
    u_tape = trace.user_tape = nn.Tape() if "user" in record else None
    a_sess = agent.start(rng)
    u_sess = user.start(goal)
    terminal = domain.actions.terminal
    world = AgentWorld(domain)

    prev_user_utt: list = []
    agent_utt: list = []
    agent_act = None
    belief = {s: NONE for s in domain.ontology.slots}
    prev_score = score(goal, belief, world.fulfilled, cfg.score_fn, False)
    trace.scores.append(prev_score)

    for k in range(1, cfg.max_turns + 1):
        u_obs = UserObservation(k, prev_user_utt, agent_utt, agent_act, world.entity, len(world.results),
                                frozenset(world.fulfilled))
        ud = u_sess.act(u_obs, u_tape, user_mode, rng)
        user_utt = add_noise(tokenize(render(ud.act, ud.slots, None, domain.user_templates, rng)),
                             cfg.noise_p, rng)

        input_flag = world.kb_flag
        a_obs = AgentObservation(k, agent_utt, user_utt, input_flag, ud.act, dict(ud.slots),
                                 len(world.results))
        ad = a_sess.act(a_obs, a_tape, agent_mode, rng)
        belief = dict(ad.belief)
        out = world.apply(ad, rng)
        s_k = score(goal, belief, world.fulfilled, cfg.score_fn, world.entity is not None)
        r_k = turn_reward(s_k, prev_score)
        prev_score = s_k

        trace.rewards.append(r_k)
        trace.scores.append(s_k)
        trace.agent_nlls.append(ad.nll)
        trace.user_nlls.append(ud.nll)
        trace.agent_actions.append(ad.action_id)
        trace.user_actions.append(ud.action_id)
        trace.agent_features.append(ad.features)
        trace.user_features.append(ud.features)
        entity = world.entity
        trace.transcript.append({
            "turn": k, "user_act": ud.act, "user_slots": dict(ud.slots), "user_utt": user_utt,
            "agent_act": ad.act, "agent_utt": out["utt"], "belief": belief,
            "pointer": out["pointer"], "entity": entity.name if entity is not None else None,
            "kb_flag": input_flag, "api_call": out["api_call"], "n_results": len(world.results),
            "fulfilled": sorted(world.fulfilled), "score": s_k, "reward": r_k,
        })
        prev_user_utt, agent_utt, agent_act = user_utt, out["utt"], ad.act
        if ud.act in terminal:
            break

    trace.success = check_success(goal, belief, world.fulfilled)
    trace.bonus = cfg.beta_succ if trace.success else cfg.beta_fail
    return trace
