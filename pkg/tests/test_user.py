import numpy as np
import pytest

from dialogrl import nn
from dialogrl.domain import UserGoal
from dialogrl.user import (
    emit_slots, encode_goal, goal_encoding_size, is_terminal, select_user_action, surfaced_slots,
    user_init, user_step,
)

from helpers import TINY_ACTIONS, TINY_ONTOLOGY, TINY_VOCAB, tiny_user, user_instance, worst_gradient_error


def test_goal_encoding_layout():
    g = UserGoal({"food": "greek"}, set())
    e = encode_goal(g, TINY_ONTOLOGY)
    assert len(e) == goal_encoding_size(TINY_ONTOLOGY) == (2 + 2) + (3 + 2) + 2
    area, food, req = e[:4], e[4:9], e[9:]
    assert area.tolist() == [0, 0, 0, 1]  # not in goal
    assert food.tolist() == [0, 0, 1, 0, 0]
    assert req.tolist() == [0, 0]
    e2 = encode_goal(UserGoal({"area": "dontcare"}, {"address"}), TINY_ONTOLOGY)
    assert e2[:4].tolist() == [0, 0, 1, 0] and e2[9:].tolist() == [0, 1]


def test_goal_encoding_rejects_unknown_values():
    with pytest.raises(ValueError):
        encode_goal(UserGoal({"food": "sushi"}, set()), TINY_ONTOLOGY)
    with pytest.raises(ValueError):
        encode_goal(UserGoal({}, {"email"}), TINY_ONTOLOGY)


def test_head_sizes():
    P = tiny_user(np.random.default_rng(0))
    assert P.act.out.n_out == len(TINY_ACTIONS.user)
    for s in TINY_ONTOLOGY.slots:
        assert P.emit[s].out.n_out == len(TINY_ONTOLOGY.informable[s]) + 1
    assert {"act.out.W", "emit.food.out.W"} <= set(P.named_parameters())


def _step(P, st, goal, ids=(1,), tape=None):
    return user_step(st, encode_goal(goal, TINY_ONTOLOGY), P.enc(list(ids), tape), P.enc([2], tape), P, tape)


def test_zero_heads_uniform():
    P = tiny_user(np.random.default_rng(1))
    for p in P.act.parameters() + P.emit["food"].parameters():
        p.value[...] = 0.0
    st, dist = _step(P, user_init(P), UserGoal({"food": "thai"}, set()))
    assert np.allclose(dist.value, 1 / len(TINY_ACTIONS.user), atol=1e-15)
    out = emit_slots(st, 0, P)
    assert np.allclose(out["food"].value, 1 / 4, atol=1e-15)
    for d in out.values():
        assert abs(d.value.sum() - 1) < 1e-9


def test_goal_sensitivity():
    P = tiny_user(np.random.default_rng(2))
    rng = np.random.default_rng(3)
    foods = TINY_ONTOLOGY.informable["food"]
    biggest = 0.0
    for _ in range(100):
        g1 = UserGoal({"food": foods[rng.integers(3)]}, {"phone"} if rng.random() < 0.5 else set())
        g2 = UserGoal({"area": "north"}, {"address"})
        _, d1 = _step(P, user_init(P), g1)
        _, d2 = _step(P, user_init(P), g2)
        biggest = max(biggest, np.abs(d1.value - d2.value).max())
    assert biggest > 0


def test_wrong_goal_shape():
    P = tiny_user(np.random.default_rng(4))
    with pytest.raises(nn.DimensionError):
        user_step(user_init(P), np.zeros(3), P.enc([1]), P.enc([1]), P)


def test_user_gradients_match_finite_differences():
    assert worst_gradient_error(user_instance(0)) < 1e-4


def test_emission_loss_reaches_goal_projection():
    P = tiny_user(np.random.default_rng(5))
    tape = nn.Tape()
    st, _ = _step(P, user_init(P), UserGoal({"food": "thai"}, {"phone"}), tape=tape)
    out = emit_slots(st, 1, P, tape)
    nn.zero_grads(P.parameters())
    nn.backward(tape, nn.cross_entropy(out["food"], 0, tape))
    assert np.abs(P.goal.W.grad).sum() > 0


def test_select_user_action():
    rng = np.random.default_rng(0)
    assert all(select_user_action(np.array([0, 0, 1.0, 0]), rng) == 2 for _ in range(500))
    draws = np.bincount([select_user_action(np.full(4, 0.25), rng) for _ in range(10_000)], minlength=4)
    assert np.all(np.abs(draws / 10_000 - 0.25) < 0.02)
    a = [select_user_action(np.full(4, 0.25), np.random.default_rng(9)) for _ in range(3)]
    b = [select_user_action(np.full(4, 0.25), np.random.default_rng(9)) for _ in range(3)]
    assert a == b


def test_is_terminal():
    assert is_terminal(TINY_ACTIONS.user_id("bye"), TINY_ACTIONS)
    assert not is_terminal(TINY_ACTIONS.user_id("inform_food"), TINY_ACTIONS)
    from dialogrl.domain import ActionVocabulary
    custom = ActionVocabulary(TINY_ACTIONS.agent, TINY_ACTIONS.user, {"bye", "ack"})
    assert is_terminal(custom.user_id("ack"), custom)


def test_surfaced_slots():
    assert surfaced_slots("inform_area_food", ["area", "food"]) == ["area", "food"]
    assert surfaced_slots("request_phone", ["area", "food"]) == []


def test_goal_encoding_constant_across_session():
    from dialogrl.language import Vocabulary
    from dialogrl.protocol import UserObservation
    from dialogrl.user import NeuralUser

    P = tiny_user(np.random.default_rng(6))
    vocab = Vocabulary([f"w{i}" for i in range(TINY_VOCAB - 3)])
    sess = NeuralUser(P, vocab, TINY_ONTOLOGY).start(UserGoal({"food": "thai"}, {"phone"}))
    first = sess.goal_enc.value.copy()
    rng = np.random.default_rng(0)
    for k in range(4):
        d = sess.act(UserObservation(k + 1, [], ["w1"], None, None, 0, frozenset()), None, "softmax", rng)
        assert d.act in TINY_ACTIONS.user
        assert np.array_equal(sess.goal_enc.value, first)
