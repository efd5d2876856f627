"""Rule-based agent and user used to synthesize corpora and as oracle policies.

Both read the structured act of the other side from the observation instead
of parsing text, so they never make understanding errors.
"""
from __future__ import annotations

import numpy as np

from .domain import API_CALL, DONTCARE, NONE, ApiCall, query_kb
from .protocol import AgentDecision, UserDecision


class ScriptedAgent:
    """Fills every slot, queries the KB, offers and answers requests.

    ``skip`` maps slot names to the per-dialog probability that the agent
    never asks for that slot (it still records it if the user volunteers
    it).  The default never skips; corpus generation uses a skip rate to
    mimic an imperfect data-collection policy.
    """

    def __init__(self, domain, skip: dict | None = None):
        self.domain = domain
        self.skip = dict(skip or {})

    def start(self, rng=None):
        skipped = {s for s, p in sorted(self.skip.items()) if rng is not None and rng.random() < p}
        return _AgentSession(self.domain, skipped)


class _AgentSession:
    def __init__(self, domain, skipped=frozenset()):
        self.domain = domain
        self.skipped = set(skipped)
        self.slots = domain.ontology.slots
        self.belief = {s: NONE for s in self.slots}
        self.called = False
        self.pointer: int | None = None
        self.n_results = 0

    def _pointer_dist(self) -> np.ndarray:
        p = np.zeros(self.domain.p_max + 1)
        p[self.domain.p_max if self.pointer is None else self.pointer] = 1.0
        return p

    def _decide(self, obs) -> str:
        ua = obs.user_act
        if ua == "bye":
            return "bye"
        if ua == "thankyou":
            return "reqmore"
        if self.called:
            if self.n_results == 0:
                return "canthelp"
            if ua == "reqalts":
                if self.pointer is not None and self.pointer + 1 < min(self.n_results, self.domain.p_max):
                    self.pointer += 1
                return "inform_name"
            if ua.startswith("request_") and self.pointer is not None:
                return "inform_" + ua[len("request_"):]
            if ua == "ack" and self.pointer is None:
                self.pointer = 0
                return "inform_name"
            return "reqmore"
        missing = [s for s in self.slots if self.belief[s] == NONE and s not in self.skipped]
        if missing:
            return "request_" + missing[0]
        return API_CALL

    def act(self, obs, tape=None, mode="greedy", rng=None) -> AgentDecision:
        for s, v in obs.user_slots.items():
            self.belief[s] = v
        act = self._decide(obs)
        if act == API_CALL:
            self.called = True
            constraints = {s: v for s, v in self.belief.items() if v != NONE}
            self.n_results = len(query_kb(self.domain.kb, ApiCall(constraints))[0])
        return AgentDecision(act, self.domain.actions.agent_id(act), dict(self.belief),
                             self._pointer_dist())


class ScriptedUser:
    """Reveals goal constraints over several turns, then asks for the requested attributes.

    ``p_all`` is the chance the opening turn states every goal constraint
    (otherwise a random non-empty subset); ``p_restate`` the chance an answer
    also repeats an already given constraint; ``p_reqalts`` the chance of
    asking for an alternative after an offer; ``p_thank`` the chance of
    thanking before saying goodbye; ``p_forget`` the per-dialog chance of
    never asking one of the goal requests.  Requests are asked in ontology
    order.
    """

    def __init__(self, domain, p_restate: float = 0.15, p_reqalts: float = 0.1,
                 p_thank: float = 0.8, p_all: float = 0.5, p_forget: float = 0.0):
        self.domain = domain
        self.p_restate = p_restate
        self.p_reqalts = p_reqalts
        self.p_thank = p_thank
        self.p_all = p_all
        self.p_forget = p_forget

    def start(self, goal):
        return _UserSession(self, goal)


class _UserSession:
    def __init__(self, owner: ScriptedUser, goal):
        self.o = owner
        self.goal = goal
        self.slots = owner.domain.ontology.slots
        self.revealed: list[str] = []
        req = owner.domain.ontology.requestable
        self.pending = sorted(goal.requests, key=lambda r: req.index(r) if r in req else len(req))
        self.asked_alt = False
        self.thanked = False

    def _inform(self, slots) -> tuple[str, dict]:
        slots = sorted(set(slots), key=self.slots.index)
        for s in slots:
            if s not in self.revealed:
                self.revealed.append(s)
        values = {s: self.goal.informables.get(s, DONTCARE) for s in slots}
        return "inform_" + "_".join(slots), values

    def _finish(self, rng) -> tuple[str, dict]:
        if not self.thanked and rng.random() < self.o.p_thank:
            self.thanked = True
            return "thankyou", {}
        return "bye", {}

    def _next_request(self, obs, rng) -> tuple[str, dict]:
        self.pending = [r for r in self.pending if r not in obs.fulfilled]
        if self.pending:
            return "request_" + self.pending[0], {}
        return self._finish(rng)

    def _decide(self, obs, rng) -> tuple[str, dict]:
        aa = obs.agent_act
        if aa is None:
            if self.pending and rng.random() < self.o.p_forget:
                self.pending.pop(int(rng.integers(len(self.pending))))
            goal_slots = [s for s in self.slots if s in self.goal.informables]
            if rng.random() < self.o.p_all:
                return self._inform(goal_slots)
            n = int(rng.integers(1, len(goal_slots) + 1))
            pick = [goal_slots[i] for i in sorted(rng.choice(len(goal_slots), size=n, replace=False))]
            return self._inform(pick)
        if aa.startswith("request_"):
            slot = aa[len("request_"):]
            others = [s for s in self.revealed if s != slot]
            if others and rng.random() < self.o.p_restate:
                return self._inform([slot, others[int(rng.integers(len(others)))]])
            return self._inform([slot])
        if aa == API_CALL:
            return "ack", {}
        if aa in ("canthelp", "bye"):
            return "bye", {}
        if aa == "inform_name":
            self.pending = [r for r in self.pending if r not in obs.fulfilled]
            if (not self.asked_alt and obs.n_results > 1 and self.pending
                    and rng.random() < self.o.p_reqalts):
                self.asked_alt = True
                return "reqalts", {}
            return self._next_request(obs, rng)
        if aa.startswith("inform_") or aa == "reqmore":
            return self._next_request(obs, rng)
        return "bye", {}

    def act(self, obs, tape=None, mode="softmax", rng=None) -> UserDecision:
        act, slots = self._decide(obs, rng)
        return UserDecision(act, self.o.domain.actions.user_id(act), slots)
