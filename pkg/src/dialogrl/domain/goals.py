from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .kb import ApiCall, KnowledgeBase, query_kb
from .ontology import DONTCARE, Ontology


@dataclass(frozen=True)
class UserGoal:
    informables: MappingProxyType
    requests: frozenset

    def __init__(self, informables: dict, requests):
        object.__setattr__(self, "informables", MappingProxyType(dict(informables)))
        object.__setattr__(self, "requests", frozenset(requests))

    def validate(self, ontology: Ontology) -> None:
        for slot, v in self.informables.items():
            if slot not in ontology.informable:
                raise ValueError(f"goal slot {slot!r} is not informable")
            if v != DONTCARE and v not in ontology.informable[slot]:
                raise ValueError(f"goal value {slot}={v!r} not in ontology")
        bad = set(self.requests) - set(ontology.requestable)
        if bad:
            raise ValueError(f"goal requests {sorted(bad)} are not requestable")

    def satisfiable(self, kb: KnowledgeBase) -> bool:
        return bool(query_kb(kb, ApiCall(dict(self.informables)))[0])

    def to_json(self) -> dict:
        return {"informables": dict(self.informables), "requests": sorted(self.requests)}

    @classmethod
    def from_json(cls, obj: dict) -> "UserGoal":
        return cls(obj["informables"], obj["requests"])

    def __hash__(self):
        return hash((tuple(sorted(self.informables.items())), self.requests))

    def __eq__(self, other):
        return (isinstance(other, UserGoal) and dict(self.informables) == dict(other.informables)
                and self.requests == other.requests)


def sample_goal(ontology: Ontology, kb: KnowledgeBase, rng: np.random.Generator,
                p_sat: float = 0.9, p_dontcare: float = 0.1) -> UserGoal:
    """Draw a goal; with probability ``p_sat`` its constraints are copied from a real entity."""
    if len(kb) == 0:
        raise ValueError("cannot sample goals from an empty knowledge base")
    slots = ontology.slots
    n_inf = int(rng.integers(1, min(3, len(slots)) + 1))
    chosen = sorted(rng.choice(len(slots), size=n_inf, replace=False))
    informables = {}
    if rng.random() < p_sat:
        ent = kb[int(rng.integers(len(kb)))]
        for i in chosen:
            s = slots[i]
            informables[s] = DONTCARE if rng.random() < p_dontcare else ent.attributes[s]
    else:
        for i in chosen:
            s = slots[i]
            vals = ontology.informable[s]
            informables[s] = vals[int(rng.integers(len(vals)))]
    req = ontology.requestable
    n_req = int(rng.integers(1, min(3, len(req)) + 1))
    requests = {req[i] for i in rng.choice(len(req), size=n_req, replace=False)}
    return UserGoal(informables, requests)


def check_success(goal: UserGoal, belief_argmax: dict, fulfilled_requests) -> bool:
    """Belief argmax matches every goal constraint and every goal request has been answered."""
    if any(belief_argmax.get(slot) != v for slot, v in goal.informables.items()):
        return False
    return goal.requests <= set(fulfilled_requests)
