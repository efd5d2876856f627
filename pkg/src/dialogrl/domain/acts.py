from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .ontology import Ontology

API_CALL = "api_call"


def flatten_act(act: str, slot_names: Iterable[str], ontology: Ontology | None = None) -> str:
    """``confirm(food=italian)`` -> ``confirm_food``; slot order follows the ontology."""
    if not act:
        raise ValueError("act name must be non-empty")
    slots = list(dict.fromkeys(slot_names))
    if ontology is not None:
        slots.sort(key=ontology.slot_order)
    return "_".join([act, *slots])


def split_act(name: str, slot_names: Iterable[str]) -> tuple[str, list[str]]:
    """Inverse of :func:`flatten_act` given the set of known slot names."""
    known = set(slot_names)
    parts = name.split("_")
    slots: list[str] = []
    while len(parts) > 1 and parts[-1] in known:
        slots.insert(0, parts.pop())
    return "_".join(parts), slots


@dataclass(frozen=True)
class ActionVocabulary:
    agent: tuple
    user: tuple
    terminal: frozenset = field(default=frozenset({"bye"}))

    def __post_init__(self):
        object.__setattr__(self, "agent", tuple(self.agent))
        object.__setattr__(self, "user", tuple(self.user))
        object.__setattr__(self, "terminal", frozenset(self.terminal))
        for side, names in (("agent", self.agent), ("user", self.user)):
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate {side} action names")
        if API_CALL not in self.agent:
            raise ValueError("agent actions must include api_call")
        if not self.terminal & set(self.user):
            raise ValueError("user actions must include a terminal act")

    def agent_id(self, name: str) -> int:
        return self.agent.index(name)

    def user_id(self, name: str) -> int:
        return self.user.index(name)

    def to_json(self) -> dict:
        return {"agent": list(self.agent), "user": list(self.user), "terminal": sorted(self.terminal)}

    @classmethod
    def from_json(cls, obj: dict) -> "ActionVocabulary":
        return cls(obj["agent"], obj["user"], frozenset(obj.get("terminal", ["bye"])))

    @classmethod
    def load(cls, path) -> "ActionVocabulary":
        return cls.from_json(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")
