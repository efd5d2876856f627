from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

DONTCARE = "dontcare"
NONE = "none"


@dataclass(frozen=True)
class Ontology:
    """Informable slots with their real candidate values, plus requestable slot names.

    The special values ``dontcare`` and ``none`` are not stored in
    ``informable``; :meth:`values` appends them.
    """

    informable: dict[str, list[str]]
    requestable: list[str] = field(default_factory=list)

    def __post_init__(self):
        for slot, vals in self.informable.items():
            if not vals:
                raise ValueError(f"informable slot {slot!r} has no candidate values")
            if DONTCARE in vals or NONE in vals:
                raise ValueError(f"slot {slot!r}: 'dontcare'/'none' are implicit, do not list them")
            if len(set(vals)) != len(vals):
                raise ValueError(f"slot {slot!r} has duplicate values")
        if len(set(self.requestable)) != len(self.requestable):
            raise ValueError("duplicate requestable slot names")

    @property
    def slots(self) -> list[str]:
        return list(self.informable)

    def values(self, slot: str) -> list[str]:
        """Candidate values for belief tracking: real values, then dontcare, then none."""
        return list(self.informable[slot]) + [DONTCARE, NONE]

    def value_index(self, slot: str, value: str) -> int:
        vals = self.values(slot)
        try:
            return vals.index(value)
        except ValueError:
            raise ValueError(f"value {value!r} is not a candidate for slot {slot!r}") from None

    def slot_order(self, slot: str) -> tuple[int, str]:
        """Sort key placing informables first, then requestables, then anything else."""
        if slot in self.informable:
            return (list(self.informable).index(slot), slot)
        if slot in self.requestable:
            return (len(self.informable) + self.requestable.index(slot), slot)
        return (len(self.informable) + len(self.requestable), slot)

    def to_json(self) -> dict:
        return {"informable": {k: list(v) for k, v in self.informable.items()},
                "requestable": list(self.requestable)}

    @classmethod
    def from_json(cls, obj: dict) -> "Ontology":
        return cls({k: list(v) for k, v in obj["informable"].items()}, list(obj.get("requestable", [])))

    @classmethod
    def load(cls, path) -> "Ontology":
        return cls.from_json(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")
