import numpy as np
import pytest

from dialogrl.domain import DialogCorpus, load_synthetic_domain
from dialogrl.domain.synthetic import generate_synthetic_corpus
from dialogrl.encoding import NetConfig, domain_vocabulary
from dialogrl.harness.pipeline import new_bundle
from dialogrl.training.config import RLConfig, SLConfig
from dialogrl.training.schedule import alternating_train, cycle_sides
from dialogrl.training.sl import evaluate_user_sl, sl_train_agent, sl_train_user
from dialogrl.user import encode_goal

SMALL = NetConfig(emb_dim=8, utt_hidden=8, dialog_hidden=16, mlp_hidden=16, act_emb_dim=4, goal_dim=8,
                  value_hidden=8, dropout=0.0)


@pytest.fixture(scope="module")
def domain():
    return load_synthetic_domain()


@pytest.fixture(scope="module")
def vocab(domain):
    return domain_vocabulary(domain)


@pytest.fixture(scope="module")
def corpus(domain):
    return generate_synthetic_corpus(domain, 240, np.random.default_rng(0))


def test_agent_sl_loss_decreases(domain, vocab, corpus):
    b = new_bundle(domain, vocab, SMALL, 0)
    res = sl_train_agent(corpus[:200], b.agent, vocab, SLConfig(epochs=3, lr=3e-3, dropout=0.0, batch_size=8),
                         np.random.default_rng(1), heldout=corpus[200:])
    assert all(b < a for a, b in zip(res.epoch_losses, res.epoch_losses[1:]))
    assert {"act_acc", "belief_acc", "pointer_acc", "loss_per_turn"} <= set(res.metrics)


def test_single_dialog_overfits(domain, vocab, corpus):
    b = new_bundle(domain, vocab, SMALL, 1)
    one = corpus[:1]
    cfg = SLConfig(epochs=500, lr=1e-2, dropout=0.0, batch_size=1)
    res = sl_train_agent(one, b.agent, vocab, cfg, np.random.default_rng(2), heldout=one, max_steps=500)
    assert len(res.step_losses) <= 500
    assert res.metrics["loss_per_turn"] < 0.01


def test_empty_corpus_rejected(domain, vocab):
    b = new_bundle(domain, vocab, NetConfig.tiny(), 0)
    with pytest.raises(ValueError):
        sl_train_agent(DialogCorpus([]), b.agent, vocab, SLConfig(), np.random.default_rng(0))
    with pytest.raises(ValueError):
        sl_train_user([], b.user, vocab, domain.ontology, SLConfig(), np.random.default_rng(0))


def test_user_depends_on_goal(domain, vocab, corpus):
    b = new_bundle(domain, vocab, SMALL, 2)
    train, held = corpus[:200], corpus[200:]
    sl_train_user(train, b.user, vocab, domain.ontology, SLConfig(epochs=4, lr=3e-3, dropout=0.0, batch_size=8),
                  np.random.default_rng(3))
    real = evaluate_user_sl(held, b.user, vocab, domain.ontology)
    # each dialog gets another dialog's goal
    shuffled = [encode_goal(held[(i + 1) % len(held)].goal, domain.ontology) for i in range(len(held))]
    ablated = evaluate_user_sl(held, b.user, vocab, domain.ontology, goal_encodings=shuffled)
    assert real["slot_acc"] - ablated["slot_acc"] > 0.05


def test_cycle_sides():
    assert cycle_sides(RLConfig(mode="joint"), 4) == ["agent", "user", "agent", "user"]
    assert cycle_sides(RLConfig(mode="agent-only"), 3) == ["agent"] * 3


@pytest.mark.parametrize("algorithm", ["reinforce", "a2c"])
def test_freeze_contract_and_cycle_log(domain, vocab, algorithm):
    b = new_bundle(domain, vocab, NetConfig.tiny(), 3)
    agent, user = b.wrappers(scope="head", cache=True)
    cfg = RLConfig(algorithm=algorithm, mode="joint", cycle_length=6, total_episodes=27, lr=1e-2,
                   episodes_per_update=2)
    snap = lambda P: {k: p.value.copy() for k, p in P.named_parameters().items()}  # noqa: E731
    prev = {"agent": snap(b.agent), "user": snap(b.user)}
    seen = []

    def check(cycle, side):
        now = {"agent": snap(b.agent), "user": snap(b.user)}
        frozen = "user" if side == "agent" else "agent"
        assert all(np.array_equal(now[frozen][k], prev[frozen][k]) for k in now[frozen])
        # head scope: only the act MLP of the learner may move
        moved = {k for k in now[side] if not np.array_equal(now[side][k], prev[side][k])}
        assert moved and all(k.startswith("act.") for k in moved)
        prev.update(now)
        seen.append(side)

    log = alternating_train(agent, user, domain, cfg, np.random.default_rng(4), on_cycle_end=check)
    assert seen == ["agent", "user", "agent", "user", "agent"]
    assert [c.episodes for c in log.cycles] == [6, 6, 6, 6, 3]
    assert all(0 <= c.success_rate <= 1 for c in log.cycles)


def test_training_is_reproducible(domain, vocab):
    def run():
        b = new_bundle(domain, vocab, NetConfig.tiny(), 5)
        agent, user = b.wrappers(scope="head")
        cfg = RLConfig(algorithm="a2c", cycle_length=5, total_episodes=20)
        log = alternating_train(agent, user, domain, cfg, np.random.default_rng(6), eval_every=10, eval_n=10,
                                eval_rng=np.random.default_rng(7))
        return b.agent.act.parameters()[0].value.copy(), log.curve
    (w1, c1), (w2, c2) = run(), run()
    assert np.array_equal(w1, w2)
    assert c1.episodes == c2.episodes == [0, 10, 20]
    assert c1.column("success_rate") == c2.column("success_rate")
