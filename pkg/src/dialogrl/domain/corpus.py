"""Dialog corpora: the turn schema, JSON-lines persistence and validation.

One line per dialog::

    {"id": str, "goal": {"informables": {slot: value}, "requests": [slot]},
     "turns": [{"user_utt": [tok], "user_act": str, "user_slots": {slot: value},
                "agent_utt": [tok], "agent_act": str, "belief": {slot: value},
                "pointer": int | null, "kb_flag": 0 | 1, "api_call": {slot: value} | null}]}

``kb_flag`` is the entity-availability bit the agent sees at that turn (the
outcome of the latest api_call made on an earlier turn). ``pointer`` is the
result-list position of the entity the agent refers to in its response, or
null when it refers to none.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .acts import API_CALL, ActionVocabulary
from .goals import UserGoal
from .ontology import DONTCARE, NONE, Ontology


class CorpusError(ValueError):
    pass


@dataclass
class Turn:
    user_utt: list
    user_act: str
    user_slots: dict
    agent_utt: list
    agent_act: str
    belief: dict
    pointer: int | None = None
    kb_flag: int = 0
    api_call: dict | None = None


@dataclass
class Dialog:
    id: str
    goal: UserGoal
    turns: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"id": self.id, "goal": self.goal.to_json(), "turns": [asdict(t) for t in self.turns]}

    @classmethod
    def from_json(cls, obj: dict) -> "Dialog":
        return cls(obj["id"], UserGoal.from_json(obj["goal"]), [Turn(**t) for t in obj["turns"]])


class DialogCorpus:
    def __init__(self, dialogs: Iterable[Dialog] = ()):
        self.dialogs: list[Dialog] = list(dialogs)

    def __len__(self):
        return len(self.dialogs)

    def __iter__(self) -> Iterator[Dialog]:
        return iter(self.dialogs)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return DialogCorpus(self.dialogs[i])
        return self.dialogs[i]

    def utterances(self) -> Iterator[list]:
        for d in self.dialogs:
            for t in d.turns:
                yield t.user_utt
                yield t.agent_utt

    def mean_turns(self) -> float:
        return sum(len(d.turns) for d in self.dialogs) / max(len(self.dialogs), 1)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(d.to_json(), sort_keys=True) + "\n" for d in self.dialogs)

    def save(self, path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def load(cls, path) -> "DialogCorpus":
        dialogs = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    dialogs.append(Dialog.from_json(json.loads(line)))
                except (KeyError, TypeError, json.JSONDecodeError) as exc:
                    raise CorpusError(f"{path}:{lineno}: malformed dialog ({exc})") from exc
        return cls(dialogs)


def validate_corpus(corpus: DialogCorpus, ontology: Ontology, actions: ActionVocabulary,
                    p_max: int = 10) -> None:
    """Shared schema check for synthetic and ingested corpora; raises CorpusError."""
    slots = set(ontology.informable)
    for d in corpus:
        where = f"dialog {d.id}"
        try:
            d.goal.validate(ontology)
        except ValueError as exc:
            raise CorpusError(f"{where}: {exc}") from exc
        if not d.turns:
            raise CorpusError(f"{where}: no turns")
        for k, t in enumerate(d.turns):
            w = f"{where} turn {k}"
            if t.user_act not in actions.user:
                raise CorpusError(f"{w}: unknown user act {t.user_act!r}")
            if t.agent_act not in actions.agent:
                raise CorpusError(f"{w}: unknown agent act {t.agent_act!r}")
            if set(t.belief) != slots:
                raise CorpusError(f"{w}: belief must cover exactly {sorted(slots)}")
            for s, v in t.belief.items():
                if v not in ontology.values(s):
                    raise CorpusError(f"{w}: belief {s}={v!r} not in ontology")
            for s, v in t.user_slots.items():
                if s not in slots or (v != DONTCARE and v not in ontology.informable[s]):
                    raise CorpusError(f"{w}: user slot {s}={v!r} not in ontology")
            if t.pointer is not None and not 0 <= t.pointer < p_max:
                raise CorpusError(f"{w}: pointer {t.pointer} outside [0, {p_max})")
            if t.kb_flag not in (0, 1):
                raise CorpusError(f"{w}: kb_flag must be 0 or 1")
            if (t.api_call is not None) != (t.agent_act == API_CALL):
                raise CorpusError(f"{w}: api_call payload must accompany exactly the api_call act")
            if t.api_call is not None and (set(t.api_call) - slots or NONE in t.api_call.values()):
                raise CorpusError(f"{w}: bad api_call constraints {t.api_call}")
            if not all(isinstance(x, str) for x in t.user_utt + t.agent_utt):
                raise CorpusError(f"{w}: utterances must be token lists")


def trace_to_dialog(trace, dialog_id: str) -> Dialog:
    """Turn an episode transcript into a labeled corpus dialog."""
    turns = []
    for r in trace.transcript:
        turns.append(Turn(
            user_utt=list(r["user_utt"]), user_act=r["user_act"], user_slots=dict(r["user_slots"]),
            agent_utt=list(r["agent_utt"]), agent_act=r["agent_act"], belief=dict(r["belief"]),
            pointer=r["pointer"], kb_flag=int(r["kb_flag"]), api_call=r["api_call"],
        ))
    return Dialog(dialog_id, trace.goal, turns)
