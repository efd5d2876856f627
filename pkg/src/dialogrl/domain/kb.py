from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .ontology import DONTCARE, NONE, Ontology


@dataclass(frozen=True)
class KbEntity:
    name: str
    attributes: dict

    def get(self, slot: str):
        if slot == "name":
            return self.name
        return self.attributes.get(slot)


class KnowledgeBase:
    """An ordered, immutable list of entities with unique names."""

    def __init__(self, entities):
        self.entities: tuple[KbEntity, ...] = tuple(entities)
        names = [e.name for e in self.entities]
        if len(set(names)) != len(names):
            raise ValueError("entity names must be unique")

    def __len__(self):
        return len(self.entities)

    def __iter__(self):
        return iter(self.entities)

    def __getitem__(self, i):
        return self.entities[i]

    def validate(self, ontology: Ontology) -> None:
        for e in self.entities:
            for slot, vals in ontology.informable.items():
                v = e.attributes.get(slot)
                if v not in vals:
                    raise ValueError(f"entity {e.name!r}: {slot}={v!r} not in ontology")

    def to_json(self) -> list:
        return [{"name": e.name, **e.attributes} for e in self.entities]

    @classmethod
    def from_json(cls, rows: list) -> "KnowledgeBase":
        return cls(KbEntity(r["name"], {k: v for k, v in r.items() if k != "name"}) for r in rows)

    @classmethod
    def load(cls, path) -> "KnowledgeBase":
        return cls.from_json(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")


@dataclass(frozen=True)
class ApiCall:
    constraints: dict

    def __post_init__(self):
        if NONE in self.constraints.values():
            raise ValueError("'none' is not a valid api_call constraint")


def query_kb(kb: KnowledgeBase, call: ApiCall) -> tuple[list[KbEntity], int]:
    """Entities matching every constraint except ``dontcare``, in KB order, plus availability bit."""
    active = {k: v for k, v in call.constraints.items() if v != DONTCARE}
    results = [e for e in kb.entities if all(e.attributes.get(k) == v for k, v in active.items())]
    return results, int(bool(results))
