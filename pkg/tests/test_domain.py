import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dialogrl.domain import (
    ApiCall, CorpusError, DialogCorpus, KbEntity, KnowledgeBase, Ontology, UserGoal, check_success,
    flatten_act, load_domain, load_synthetic_domain, query_kb, sample_goal, save_domain, split_act,
    validate_corpus,
)
from dialogrl.domain.synthetic import generate_synthetic_corpus
from dialogrl.scripted import ScriptedAgent, ScriptedUser
from dialogrl.training.rollout import RolloutConfig, run_episode


@pytest.fixture(scope="module")
def domain():
    return load_synthetic_domain()


def brute_filter(kb, constraints):
    out = []
    for e in kb:
        ok = True
        for k, v in constraints.items():
            if v != "dontcare" and e.attributes[k] != v:
                ok = False
        if ok:
            out.append(e)
    return out


def test_synthetic_domain_shape(domain):
    o = domain.ontology
    assert set(o.informable) == {"area", "food", "pricerange"}
    assert {"address", "phone", "postcode"} <= set(o.requestable)
    assert [len(o.informable[s]) for s in ("area", "food", "pricerange")] == [5, 8, 3]
    assert len(domain.kb) == 40
    for e in domain.kb:
        for s in o.informable:
            assert e.attributes[s] in o.informable[s]


def test_ontology_values_append_specials(domain):
    vals = domain.ontology.values("pricerange")
    assert vals[-2:] == ["dontcare", "none"]
    with pytest.raises(ValueError):
        Ontology({"food": ["thai", "none"]})
    with pytest.raises(ValueError):
        Ontology({"food": []})


def test_query_kb_examples(domain):
    res, flag = query_kb(domain.kb, ApiCall({}))
    assert res == list(domain.kb) and flag == 1
    res, flag = query_kb(domain.kb, ApiCall({"food": "no-such-food"}))
    assert res == [] and flag == 0
    kb20 = KnowledgeBase(domain.kb.entities[:20])
    call = {"food": "italian"}
    assert query_kb(kb20, ApiCall(call))[0] == brute_filter(kb20, call)


def test_api_call_rejects_none():
    with pytest.raises(ValueError):
        ApiCall({"food": "none"})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100), st.integers(0, 2**32 - 1))
def test_query_kb_matches_linear_filter(n, seed):
    rng = np.random.default_rng(seed)
    vals = {"a": ["x", "y", "z"], "b": ["p", "q"]}
    kb = KnowledgeBase(KbEntity(f"e{i}", {s: vals[s][rng.integers(len(vals[s]))] for s in vals})
                       for i in range(n))
    call = {}
    for s in vals:
        r = rng.integers(4)
        if r == 1:
            call[s] = "dontcare"
        elif r >= 2:
            call[s] = vals[s][rng.integers(len(vals[s]))]
    res, flag = query_kb(kb, ApiCall(call))
    assert res == brute_filter(kb, call)
    assert flag == int(bool(res))


def test_kb_names_unique():
    with pytest.raises(ValueError):
        KnowledgeBase([KbEntity("a", {}), KbEntity("a", {})])


def test_sample_goal_satisfiable_without_dontcare(domain):
    rng = np.random.default_rng(0)
    for _ in range(500):
        g = sample_goal(domain.ontology, domain.kb, rng, p_sat=1.0, p_dontcare=0.0)
        assert g.satisfiable(domain.kb)


def test_sample_goal_request_sizes_uniform(domain):
    rng = np.random.default_rng(1)
    n = 10_000
    sizes = Counter()
    for _ in range(n):
        g = sample_goal(domain.ontology, domain.kb, rng)
        g.validate(domain.ontology)
        sizes[len(g.requests)] += 1
        assert 1 <= len(g.informables) <= 3
    for k in (1, 2, 3):
        assert abs(sizes[k] / n - 1 / 3) < 0.03


def test_sample_goal_requires_kb(domain):
    with pytest.raises(ValueError):
        sample_goal(domain.ontology, KnowledgeBase([]), np.random.default_rng(0))


def test_goal_is_immutable():
    g = UserGoal({"food": "thai"}, {"phone"})
    with pytest.raises(TypeError):
        g.informables["food"] = "x"
    assert UserGoal.from_json(g.to_json()) == g


def test_flatten_act_examples(domain):
    assert flatten_act("confirm", ["food"]) == "confirm_food"
    assert flatten_act("inform", ["food", "area"], domain.ontology) == "inform_area_food"
    assert flatten_act("bye", []) == "bye"
    with pytest.raises(ValueError):
        flatten_act("", ["food"])
    assert split_act("inform_area_food", domain.ontology.slots) == ("inform", ["area", "food"])


def test_flatten_act_injective_on_corpus(domain):
    corpus = generate_synthetic_corpus(domain, 200, np.random.default_rng(3))
    slots = domain.ontology.slots + list(domain.ontology.requestable)
    seen = {}
    for d in corpus:
        for t in d.turns:
            for name in (t.user_act, t.agent_act):
                key = split_act(name, slots)
                assert flatten_act(key[0], key[1], domain.ontology) == name
                assert seen.setdefault(name, key) == key


def test_check_success_examples():
    g = UserGoal({"food": "italian"}, {"phone"})
    assert check_success(g, {"food": "italian"}, {"phone", "address"})
    assert not check_success(g, {"food": "chinese"}, {"phone", "address"})
    assert not check_success(g, {"food": "italian"}, set())


@settings(max_examples=100, deadline=None)
@given(st.sets(st.sampled_from(["phone", "address", "postcode"])),
       st.sets(st.sampled_from(["phone", "address", "postcode"])),
       st.sampled_from(["italian", "thai"]))
def test_check_success_monotone_in_fulfilled(req, extra, food):
    g = UserGoal({"food": "italian"}, req)
    belief = {"food": food}
    for base in (set(), req):
        if check_success(g, belief, base):
            assert check_success(g, belief, base | extra)


def test_corpus_generation_deterministic_and_sized(domain):
    a = generate_synthetic_corpus(domain, 50, np.random.default_rng(7))
    b = generate_synthetic_corpus(domain, 50, np.random.default_rng(7))
    assert a.to_jsonl() == b.to_jsonl()
    assert len(generate_synthetic_corpus(domain, 1000, np.random.default_rng(8))) == 1000
    validate_corpus(a, domain.ontology, domain.actions, domain.p_max)


def test_corpus_roundtrip(domain, tmp_path):
    c = generate_synthetic_corpus(domain, 20, np.random.default_rng(9))
    c.save(tmp_path / "c.jsonl")
    back = DialogCorpus.load(tmp_path / "c.jsonl")
    assert back.to_jsonl() == c.to_jsonl()
    (tmp_path / "bad.jsonl").write_text('{"id": "x"}\n')
    with pytest.raises(CorpusError, match="bad.jsonl:1"):
        DialogCorpus.load(tmp_path / "bad.jsonl")


def test_validator_rejects_unknown_act(domain):
    c = generate_synthetic_corpus(domain, 3, np.random.default_rng(10))
    c[0].turns[0].agent_act = "dance"
    with pytest.raises(CorpusError, match="unknown agent act"):
        validate_corpus(c, domain.ontology, domain.actions)


def test_scripted_policies_succeed_on_satisfiable_goals(domain):
    rng = np.random.default_rng(11)
    agent, user = ScriptedAgent(domain, skip={}), ScriptedUser(domain)
    n = 0
    while n < 200:
        g = sample_goal(domain.ontology, domain.kb, rng)
        if not g.satisfiable(domain.kb):
            continue
        n += 1
        tr = run_episode(agent, user, domain, g, RolloutConfig(), rng, agent_mode="greedy")
        assert tr.success, g


def test_domain_save_load_roundtrip(domain, tmp_path):
    save_domain(domain, tmp_path / "d")
    back = load_domain(tmp_path / "d")
    assert back.ontology == domain.ontology
    assert back.actions == domain.actions
    assert json.dumps(back.kb.to_json()) == json.dumps(domain.kb.to_json())
