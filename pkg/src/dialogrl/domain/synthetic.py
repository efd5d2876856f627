"""The bundled restaurant domain and the scripted-dialog corpus generator.

``build_synthetic_domain`` regenerates the JSON files shipped in
``dialogrl/data``; the package itself only ever loads those files.
"""
from __future__ import annotations

import numpy as np

from .acts import ActionVocabulary
from .kb import KbEntity, KnowledgeBase
from .ontology import Ontology

AREAS = ["north", "south", "east", "west", "centre"]
FOODS = ["italian", "chinese", "indian", "thai", "french", "british", "spanish", "korean"]
PRICES = ["cheap", "moderate", "expensive"]
REQUESTABLE = ["address", "phone", "postcode"]

_ADJ = ["golden", "red", "little", "royal", "lucky", "green", "silver", "old", "happy", "blue"]
_NOUN = ["dragon", "garden", "lotus", "kitchen", "table", "oak", "bell", "anchor", "spoon", "lantern"]
_STREETS = ["mill road", "king street", "regent street", "hills road", "bridge street",
            "market hill", "trinity street", "castle street"]

AGENT_ACTIONS = [
    "request_area", "request_food", "request_pricerange", "api_call", "inform_name",
    "inform_address", "inform_phone", "inform_postcode", "canthelp", "reqmore", "bye",
]
USER_ACTIONS = [
    "inform_area", "inform_food", "inform_pricerange", "inform_area_food",
    "inform_area_pricerange", "inform_food_pricerange", "inform_area_food_pricerange",
    "request_address", "request_phone", "request_postcode", "reqalts", "ack", "thankyou", "bye",
]

AGENT_TEMPLATES = {
    "request_area": ["what part of town do you have in mind ?", "which area would you like ?"],
    "request_food": ["what kind of food would you like ?", "what type of food are you looking for ?"],
    "request_pricerange": ["what price range would you like ?", "how expensive should it be ?"],
    "api_call": ["api_call <area> <food> <pricerange>"],
    "inform_name": ["<name> is a nice restaurant in the <area> of town serving <food> food",
                    "<name> serves <food> food in the <area> part of town and it is <pricerange>"],
    "inform_address": ["the address of <name> is <address>", "<name> is located at <address>"],
    "inform_phone": ["the phone number of <name> is <phone>", "you can call <name> at <phone>"],
    "inform_postcode": ["the post code of <name> is <postcode>", "<name> is in post code <postcode>"],
    "canthelp": ["sorry , there is no restaurant matching your request",
                 "i am sorry but i could not find a matching restaurant"],
    "reqmore": ["is there anything else i can help you with ?", "can i help you with anything else ?"],
    "bye": ["goodbye .", "thank you for using our service , goodbye ."],
}

USER_TEMPLATES = {
    "inform_area": ["i want a restaurant in the <area> part of town", "the <area> area please",
                    "<area>"],
    "inform_food": ["i want <food> food", "i am looking for a <food> restaurant", "<food> food"],
    "inform_pricerange": ["i want a <pricerange> restaurant", "something <pricerange> please",
                          "<pricerange> price range"],
    "inform_area_food": ["i want <food> food in the <area> part of town",
                         "a <food> restaurant in the <area> area"],
    "inform_area_pricerange": ["a <pricerange> restaurant in the <area> part of town",
                               "something <pricerange> in the <area> area"],
    "inform_food_pricerange": ["i want a <pricerange> <food> restaurant",
                               "<food> food in the <pricerange> price range"],
    "inform_area_food_pricerange": [
        "i want a <pricerange> <food> restaurant in the <area> part of town",
        "<food> food , <pricerange> price range , <area> area"],
    "request_address": ["what is the address ?", "can i have the address please"],
    "request_phone": ["what is the phone number ?", "can i have the phone number please"],
    "request_postcode": ["what is the post code ?", "can i have the post code please"],
    "reqalts": ["is there anything else ?", "how about a different restaurant ?"],
    "ack": ["okay", "alright"],
    "thankyou": ["thank you", "great thanks"],
    "bye": ["goodbye", "thank you goodbye"],
}

DISTRACTORS = ["um", "uh", "well", "hmm", "actually", "so", "yes", "right"]


def build_synthetic_ontology() -> Ontology:
    return Ontology({"area": list(AREAS), "food": list(FOODS), "pricerange": list(PRICES)},
                    list(REQUESTABLE))


def build_synthetic_kb(n: int = 40, seed: int = 2017) -> KnowledgeBase:
    """Deterministic KB; every area and food occurs at least once."""
    rng = np.random.default_rng(seed)
    names = [f"the {a} {b}" for a in _ADJ for b in _NOUN]
    picked = rng.choice(len(names), size=n, replace=False)
    combos = [(a, f, p) for a in AREAS for f in FOODS for p in PRICES]
    order = rng.permutation(len(combos))
    # cover every area and food before filling randomly
    chosen, seen_a, seen_f = [], set(), set()
    for k in order:
        a, f, p = combos[k]
        if a not in seen_a or f not in seen_f:
            chosen.append(k)
            seen_a.add(a)
            seen_f.add(f)
    for k in order:
        if len(chosen) >= n:
            break
        if k not in chosen:
            chosen.append(k)
    ents = []
    for i, (k, ni) in enumerate(zip(chosen[:n], picked)):
        a, f, p = combos[k]
        ents.append(KbEntity(names[ni], {
            "area": a, "food": f, "pricerange": p,
            "address": f"{int(rng.integers(1, 99))} {_STREETS[int(rng.integers(len(_STREETS)))]}",
            "phone": f"01223 {int(rng.integers(100000, 999999))}",
            "postcode": f"cb{int(rng.integers(1, 5))} {int(rng.integers(1, 9))}{chr(97 + int(rng.integers(26)))}{chr(97 + int(rng.integers(26)))}",
        }))
    return KnowledgeBase(ents)


def build_synthetic_actions() -> ActionVocabulary:
    return ActionVocabulary(AGENT_ACTIONS, USER_ACTIONS, frozenset({"bye"}))


CORPUS_AGENT_SKIP = {"pricerange": 0.6}
CORPUS_USER_FORGET = 0.3


def generate_synthetic_corpus(domain, n: int, rng: np.random.Generator, *,
                              p_restate: float = 0.15, p_noise: float = 0.1, p_sat: float = 0.9,
                              max_turns: int = 20, agent_skip: dict | None = None,
                              user_forget: float | None = None):
    """Dialogs between the scripted agent and scripted user, fully labeled.

    Both data-collection policies are imperfect by default: the agent never
    asks for the price range in some dialogs (``agent_skip``, default
    :data:`CORPUS_AGENT_SKIP`) and the user forgets one of its requests in
    some dialogs (``user_forget``, default :data:`CORPUS_USER_FORGET`).
    Pass ``agent_skip={}`` and ``user_forget=0`` for flawless policies.
    """
    from ..scripted import ScriptedAgent, ScriptedUser
    from ..training.rollout import RolloutConfig, run_episode
    from .corpus import DialogCorpus, trace_to_dialog
    from .goals import sample_goal

    if n < 1:
        raise ValueError("n must be at least 1")
    agent = ScriptedAgent(domain, CORPUS_AGENT_SKIP if agent_skip is None else agent_skip)
    user = ScriptedUser(domain, p_restate=p_restate,
                        p_forget=CORPUS_USER_FORGET if user_forget is None else user_forget)
    cfg = RolloutConfig(max_turns=max_turns, noise_p=p_noise)
    dialogs = []
    for i in range(n):
        goal = sample_goal(domain.ontology, domain.kb, rng, p_sat=p_sat)
        trace = run_episode(agent, user, domain, goal, cfg, rng=rng, agent_mode="greedy")
        dialogs.append(trace_to_dialog(trace, f"synth-{i:06d}"))
    return DialogCorpus(dialogs)
