"""Writes a two-session miniature of the DSTC2 release layout."""
import json
from pathlib import Path

ONTOLOGY = {
    "informable": {"area": ["north", "south"], "food": ["thai", "greek"], "pricerange": ["cheap", "expensive"],
                   "name": ["golden house", "the olive"]},
    "requestable": ["addr", "phone", "area", "food", "pricerange", "name"],
}


def _act(act, *slots):
    return {"act": act, "slots": [list(s) for s in slots]}


def _session(sid, food, area, name, phone):
    log = {"session-id": sid, "turns": [
        {"output": {"transcript": "Hello , welcome . How may I help you?", "dialog-acts": [_act("welcomemsg")]}},
        {"output": {"transcript": "What part of town do you have in mind?",
                    "dialog-acts": [_act("request", ("slot", "area"))]}},
        {"output": {"transcript": f"{name} is a nice place in the {area} of town serving {food} food",
                    "dialog-acts": [_act("offer", ("name", name)), _act("inform", ("area", area)),
                                    _act("inform", ("food", food))]}},
        {"output": {"transcript": f"The phone number of {name} is {phone} .",
                    "dialog-acts": [_act("inform", ("name", name)), _act("inform", ("phone", phone))]}},
    ]}
    label = {"session-id": sid,
             "task-information": {"goal": {"constraints": [["food", food], ["area", area]],
                                           "request-slots": ["phone"]}},
             "turns": [
                 {"transcription": f"i want {food} food", "semantics": {"json": [_act("inform", ("food", food))]},
                  "goal-labels": {"food": food}},
                 {"transcription": area, "semantics": {"json": [_act("inform", ("area", area))]},
                  "goal-labels": {"food": food, "area": area}},
                 {"transcription": "what is the phone number",
                  "semantics": {"json": [_act("request", ("slot", "phone"))]},
                  "goal-labels": {"food": food, "area": area}},
                 {"transcription": "thank you goodbye", "semantics": {"json": [_act("bye")]},
                  "goal-labels": {"food": food, "area": area}},
             ]}
    return log, label


SESSIONS = {
    "train": [("Mar13_S0A0/voip-aa", "thai", "north", "golden house", "01223 1")],
    "dev": [("Mar13_S0A1/voip-bb", "greek", "south", "the olive", "01223 2")],
    "test": [("Mar13_S0A2/voip-cc", "thai", "north", "golden house", "01223 1")],
}


def write_fake_dstc2(root) -> Path:
    root = Path(root)
    cfg = root / "scripts" / "config"
    cfg.mkdir(parents=True)
    (cfg / "ontology_dstc2.json").write_text(json.dumps(ONTOLOGY))
    for split, sessions in SESSIONS.items():
        (cfg / f"dstc2_{split}.flist").write_text("\n".join(s[0] for s in sessions) + "\n")
        for sid, food, area, name, phone in sessions:
            d = root / "data" / sid
            d.mkdir(parents=True)
            log, label = _session(sid, food, area, name, phone)
            (d / "log.json").write_text(json.dumps(log))
            (d / "label.json").write_text(json.dumps(label))
    return root
