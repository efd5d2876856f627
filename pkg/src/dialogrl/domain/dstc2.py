"""Conversion of DSTC2-format data into the corpus schema.

Expected layout under ``root`` (as distributed)::

    scripts/config/dstc2_{train,dev,test}.flist
    scripts/config/ontology_dstc2.json
    data/<session path>/log.json, label.json     (the flist entries)
    kb.json                                      (optional, KnowledgeBase format)

DSTC2 turns are "system then user"; here a turn is "user then agent", so
user turn i pairs with the system output of log turn i+1.  An ``api_call``
turn is inserted just before the first system offer or canthelp: the
original user turn gets ``api_call`` as its agent act and the offer moves to
a new turn whose user act is ``null`` (empty utterance).  A final user turn
with no system reply gets a closing ``bye``.  Multi-act turns are joined
with ``+`` after flattening each act (``inform(food=x)`` -> ``inform_food``).
"""
from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

from ..language import TemplateSet, tokenize
from .acts import API_CALL, ActionVocabulary, flatten_act
from .corpus import Dialog, DialogCorpus, Turn, validate_corpus
from .goals import UserGoal
from .kb import ApiCall, KbEntity, KnowledgeBase, query_kb
from .ontology import DONTCARE, NONE, Ontology

SPLITS = ("train", "dev", "test")
SLOT_RENAME = {"addr": "address"}
ENTITY_ATTRS = ("area", "food", "pricerange", "address", "phone", "postcode")
NULL_ACT = "null"


class Dstc2Error(ValueError):
    pass


def _slot(name: str) -> str:
    return SLOT_RENAME.get(name, name)


def _find(root: Path, name: str) -> Path:
    for cand in (root / "scripts" / "config" / name, root / "config" / name, root / name):
        if cand.exists():
            return cand
    raise Dstc2Error(f"{name} not found under {root}")


def _session_dir(root: Path, entry: str) -> Path:
    for base in (root / "data", root):
        if (base / entry / "log.json").exists():
            return base / entry
    raise Dstc2Error(f"session {entry!r} not found under {root}")


def load_ontology(root) -> Ontology:
    obj = json.loads(_find(Path(root), "ontology_dstc2.json").read_text())
    inf = {s: list(v) for s, v in obj["informable"].items() if s != "name"}
    for vals in inf.values():
        for special in (DONTCARE, NONE):
            if special in vals:
                vals.remove(special)
    req = [_slot(s) for s in obj.get("requestable", []) if _slot(s) not in inf and s != "name"]
    return Ontology(inf, req)


def _flatten(acts, ontology: Ontology) -> str:
    names = []
    for a in acts:
        slots = [_slot(s[0]) for s in a.get("slots", []) if s and s[0] != "slot"]
        # request(slot=food) names the slot in the value position
        slots += [_slot(s[1]) for s in a.get("slots", []) if s and s[0] == "slot"]
        names.append(flatten_act(a["act"], slots, ontology))
    return "+".join(names) if names else NULL_ACT


def _entities_from_acts(acts, found: dict) -> None:
    name = None
    attrs = {}
    for a in acts:
        for s in a.get("slots", []):
            if len(s) == 2 and s[0] == "name":
                name = s[1]
            elif len(s) == 2 and _slot(s[0]) in ENTITY_ATTRS:
                attrs[_slot(s[0])] = s[1]
    if name:
        found.setdefault(name, {}).update(attrs)


def derive_kb(sessions, ontology: Ontology) -> KnowledgeBase:
    """Entities named in system offers, with every attribute the system ever stated for them."""
    found: dict = {}
    for log, _ in sessions:
        for t in log["turns"]:
            _entities_from_acts(t["output"].get("dialog-acts", []), found)
    ents = []
    for name in sorted(found):
        attrs = {k: v for k, v in found[name].items()
                 if k not in ontology.informable or v in ontology.informable[k]}
        ents.append(KbEntity(name, attrs))
    return KnowledgeBase(ents)


def _offered_name(acts):
    for a in acts:
        if a["act"] == "offer":
            for s in a.get("slots", []):
                if s[0] == "name":
                    return s[1]
    return None


def _user_slots(acts, ontology: Ontology) -> dict:
    out = {}
    for a in acts:
        if a["act"] != "inform":
            continue
        for s in a.get("slots", []):
            if len(s) == 2 and s[0] in ontology.informable:
                v = s[1]
                if v == DONTCARE or v in ontology.informable[s[0]]:
                    out[s[0]] = v
    return out


def convert_session(log: dict, label: dict, ontology: Ontology, kb: KnowledgeBase,
                    p_max: int = 10) -> Dialog:
    info = label.get("task-information", {}).get("goal", {})
    inf = {s: v for s, v in info.get("constraints", []) if s in ontology.informable}
    reqs = {_slot(r) for r in info.get("request-slots", []) if _slot(r) in ontology.requestable}
    goal = UserGoal(inf, reqs)
    lturns, uturns = log["turns"], label["turns"]
    turns: list[Turn] = []
    called = False
    kb_flag = 0
    results: list = []
    for i, ut in enumerate(uturns):
        uacts = ut.get("semantics", {}).get("json", [])
        belief = {s: NONE for s in ontology.informable}
        for s, v in ut.get("goal-labels", {}).items():
            if s in belief and (v == DONTCARE or v in ontology.informable[s]):
                belief[s] = v
        if i + 1 < len(lturns):
            out = lturns[i + 1]["output"]
            sacts, sutt = out.get("dialog-acts", []), tokenize(out.get("transcript", ""))
        else:
            sacts, sutt = [{"act": "bye", "slots": []}], ["goodbye", "."]
        user = dict(user_utt=tokenize(ut.get("transcription", "")), user_act=_flatten(uacts, ontology),
                    user_slots=_user_slots(uacts, ontology))
        if not called and any(a["act"] in ("offer", "canthelp") for a in sacts):
            called = True
            call = {s: v for s, v in belief.items() if v != NONE}
            turns.append(Turn(agent_utt=tokenize(API_CALL + " " + " ".join(call.values())),
                              agent_act=API_CALL, belief=dict(belief), pointer=None, kb_flag=kb_flag,
                              api_call=call, **user))
            results, kb_flag = query_kb(kb, ApiCall(call))
            user = dict(user_utt=[], user_act=NULL_ACT, user_slots={})
        name = _offered_name(sacts)
        pointer = None
        if name is not None:
            names = [e.name for e in results[:p_max]]
            pointer = names.index(name) if name in names else None
        turns.append(Turn(agent_utt=sutt, agent_act=_flatten(sacts, ontology), belief=belief,
                          pointer=pointer, kb_flag=kb_flag, api_call=None, **user))
    return Dialog(str(log.get("session-id", label.get("session-id", ""))), goal, turns)


def read_flist(root, split: str) -> list:
    path = _find(Path(root), f"dstc2_{split}.flist")
    return [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]


def _load_sessions(root: Path, entries):
    out = []
    for e in entries:
        d = _session_dir(root, e)
        out.append((json.loads((d / "log.json").read_text()), json.loads((d / "label.json").read_text())))
    return out


def delexicalized_templates(corpus: DialogCorpus, ontology: Ontology, kb: KnowledgeBase,
                            per_act: int = 3) -> tuple[TemplateSet, TemplateSet]:
    """Most frequent utterances per act with slot values replaced by placeholders."""
    lex = {}
    for s, vals in ontology.informable.items():
        for v in vals:
            lex[v] = s
    for e in kb.entities:
        lex[e.name] = "name"
        for k, v in e.attributes.items():
            lex.setdefault(str(v), k)
    keys = sorted(lex, key=len, reverse=True)

    def delex(tokens) -> str:
        text = " " + " ".join(tokens) + " "
        for v in keys:
            pat = " " + " ".join(tokenize(v)) + " "
            if pat.strip() and pat in text:
                text = text.replace(pat, f" <{lex[v]}> ")
        return text.strip()

    agent, user = {}, {}
    for d in corpus:
        for t in d.turns:
            agent.setdefault(t.agent_act, Counter())[delex(t.agent_utt)] += 1
            user.setdefault(t.user_act, Counter())[delex(t.user_utt)] += 1

    def pick(table):
        out = {}
        for act, counts in sorted(table.items()):
            texts = [x for x, _ in counts.most_common() if x][:per_act]
            out[act] = texts or [act.replace("_", " ")]
        return out

    return TemplateSet(pick(agent)), TemplateSet(pick(user))


def ingest(root, p_max: int = 10) -> dict:
    """Convert every split; returns {"ontology", "kb", "actions", "splits": {name: corpus}, "templates"}."""
    root = Path(root)
    ontology = load_ontology(root)
    sessions = {sp: _load_sessions(root, read_flist(root, sp)) for sp in SPLITS}
    kb_path = root / "kb.json"
    if kb_path.exists():
        kb = KnowledgeBase.load(kb_path)
    else:
        kb = derive_kb([s for sp in SPLITS for s in sessions[sp]], ontology)
    splits = {sp: DialogCorpus(convert_session(lg, lb, ontology, kb, p_max) for lg, lb in sessions[sp])
              for sp in SPLITS}
    agent_acts, user_acts = set(), set()
    for c in splits.values():
        for d in c:
            for t in d.turns:
                agent_acts.add(t.agent_act)
                user_acts.add(t.user_act)
    agent_acts.add(API_CALL)
    user_acts.add("bye")
    actions = ActionVocabulary(sorted(agent_acts), sorted(user_acts))
    for c in splits.values():
        validate_corpus(c, ontology, actions, p_max)
    templates = delexicalized_templates(splits["train"], ontology, kb)
    return {"ontology": ontology, "kb": kb, "actions": actions, "splits": splits, "templates": templates}


def statistics(result: dict) -> dict:
    s = result["splits"]
    all_d = [d for c in s.values() for d in c]
    return {
        "dialogs": {sp: len(c) for sp, c in s.items()},
        "mean_turns": sum(len(d.turns) for d in all_d) / max(len(all_d), 1),
        "agent_actions": len(result["actions"].agent),
        "user_actions": len(result["actions"].user),
        "options": {k: len(v) for k, v in result["ontology"].informable.items()},
    }
