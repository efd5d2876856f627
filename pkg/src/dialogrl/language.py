"""Tokenization, vocabularies and template-based surface realization."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAD, UNK, NULL_UTT = "<pad>", "<unk>", "<null>"
RESERVED = (PAD, UNK, NULL_UTT)

_TOKEN = re.compile(r"[\w']+|[^\w\s]")
_PLACEHOLDER = re.compile(r"<([a-z_]+)>")


def tokenize(text: str) -> list[str]:
    """Lowercase, split punctuation into separate tokens, split on whitespace."""
    return _TOKEN.findall(text.lower())


class Vocabulary:
    def __init__(self, tokens: Iterable[str] = ()):
        self.itos: list[str] = list(RESERVED)
        self.stoi: dict[str, int] = {t: i for i, t in enumerate(self.itos)}
        for t in tokens:
            self.add(t)

    def add(self, token: str) -> int:
        if token not in self.stoi:
            self.stoi[token] = len(self.itos)
            self.itos.append(token)
        return self.stoi[token]

    def __len__(self):
        return len(self.itos)

    def __contains__(self, token):
        return token in self.stoi

    @property
    def unk_id(self) -> int:
        return self.stoi[UNK]

    @property
    def null_id(self) -> int:
        return self.stoi[NULL_UTT]

    @classmethod
    def build(cls, utterances: Iterable[Sequence[str]]) -> "Vocabulary":
        """Sorted vocabulary over all tokens of the given utterances."""
        seen = set()
        for utt in utterances:
            seen.update(utt)
        seen -= set(RESERVED)
        return cls(sorted(seen))

    def to_json(self) -> list:
        return self.itos[len(RESERVED):]

    @classmethod
    def from_json(cls, tokens: list) -> "Vocabulary":
        return cls(tokens)


def encode_tokens(tokens: Sequence[str], vocab: Vocabulary) -> list[int]:
    if not tokens:
        return [vocab.null_id]
    unk = vocab.unk_id
    return [vocab.stoi.get(t, unk) for t in tokens]


class RenderError(KeyError):
    pass


@dataclass(frozen=True)
class TemplateSet:
    templates: dict

    def __post_init__(self):
        for act, variants in self.templates.items():
            if not variants:
                raise ValueError(f"act {act!r} has no templates")

    def __contains__(self, act):
        return act in self.templates

    def placeholders(self, act: str) -> set[str]:
        return {m for t in self.templates[act] for m in _PLACEHOLDER.findall(t)}

    def check_coverage(self, acts: Iterable[str], slot_names: Iterable[str]) -> None:
        allowed = set(slot_names) | {"name"}
        for act in acts:
            if act not in self.templates:
                raise ValueError(f"no template for act {act!r}")
            bad = self.placeholders(act) - allowed
            if bad:
                raise ValueError(f"act {act!r} uses unknown placeholders {sorted(bad)}")

    @classmethod
    def load(cls, path) -> "TemplateSet":
        return cls(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.templates, indent=2) + "\n")


def render(act: str, slots: dict | None, entity, templates: TemplateSet,
           rng: np.random.Generator) -> str:
    """Pick a template variant uniformly and fill its placeholders.

    Placeholders resolve from ``slots`` first, then from the entity's
    attributes (``<name>`` is the entity name).
    """
    if act not in templates.templates:
        raise RenderError(f"no template for act {act!r}")
    variants = templates.templates[act]
    text = variants[int(rng.integers(len(variants)))]
    slots = slots or {}

    def fill(m):
        key = m.group(1)
        if key in slots and slots[key] is not None:
            return str(slots[key])
        if entity is not None:
            v = entity.get(key)
            if v is not None:
                return str(v)
        raise RenderError(f"cannot resolve placeholder <{key}> for act {act!r}")

    out = _PLACEHOLDER.sub(fill, text)
    if not out.strip():
        raise RenderError(f"act {act!r} rendered to an empty string")
    return out
