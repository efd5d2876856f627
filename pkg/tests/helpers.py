"""Shared builders for the test suite: a tiny domain and randomized gradient-check instances."""
import numpy as np

from dialogrl import nn
from dialogrl.agent import AgentParams, agent_init, agent_step
from dialogrl.domain import ActionVocabulary, KbEntity, KnowledgeBase, Ontology, UserGoal
from dialogrl.encoding import NetConfig
from dialogrl.nn.gradcheck import check_gradients
from dialogrl.training.pg import ValueNet
from dialogrl.user import UserParams, emit_slots, encode_goal, user_init, user_step

TINY_ONTOLOGY = Ontology({"area": ["north", "south"], "food": ["thai", "french", "greek"]},
                         ["phone", "address"])
TINY_ACTIONS = ActionVocabulary(
    ["request_area", "request_food", "api_call", "inform_name", "inform_phone", "bye"],
    ["inform_area", "inform_food", "inform_area_food", "request_phone", "ack", "bye"])
TINY_KB = KnowledgeBase([
    KbEntity("a", {"area": "north", "food": "thai", "phone": "1", "address": "x st"}),
    KbEntity("b", {"area": "south", "food": "thai", "phone": "2", "address": "y st"}),
    KbEntity("c", {"area": "south", "food": "greek", "phone": "3", "address": "z st"}),
])
TINY_VOCAB = 9
TINY_P_MAX = 3


def _jitter(module, rng, scale=0.5):
    # O(1) weights and biases: with the small production init many weight
    # gradients sit near 1e-7, where finite-difference roundoff dominates
    for p in module.parameters():
        p.value[...] = rng.normal(scale=scale, size=p.value.shape)


def tiny_agent(rng, cfg=NetConfig.tiny()):
    p = AgentParams(TINY_VOCAB, TINY_ONTOLOGY, TINY_ACTIONS, TINY_P_MAX, cfg, rng)
    _jitter(p, rng)
    return p


def tiny_user(rng, cfg=NetConfig.tiny()):
    p = UserParams(TINY_VOCAB, TINY_ONTOLOGY, TINY_ACTIONS, cfg, rng)
    _jitter(p, rng)
    return p


def _utt(rng):
    return [int(i) for i in rng.integers(0, TINY_VOCAB, size=int(rng.integers(1, 4)))]


def agent_instance(seed: int):
    """(loss_fn(tape), params) for a random 2-3 turn dialog mixing action, belief and pointer CE."""
    rng = np.random.default_rng(seed)
    P = tiny_agent(rng)
    turns = []
    for _ in range(int(rng.integers(2, 4))):
        turns.append((_utt(rng), _utt(rng), int(rng.integers(2)), int(rng.integers(len(P.actions))),
                      {s: int(rng.integers(len(P.values[s]))) for s in P.slots},
                      int(rng.integers(P.p_max + 1))))

    def loss(tape):
        st = agent_init(P)
        terms = []
        for prev, user, kb, a, bel, ptr in turns:
            st, dist, bdists, pdist = agent_step(st, P.enc(prev, tape), P.enc(user, tape), kb, P, tape)
            terms.append(nn.cross_entropy(dist, a, tape))
            terms.extend(nn.cross_entropy(bdists[s], bel[s], tape) for s in P.slots)
            terms.append(nn.cross_entropy(pdist, ptr, tape))
            st.last_action = a
        return nn.add_scalars(terms, tape)
    return loss, P.parameters()


def user_instance(seed: int):
    """(loss_fn(tape), params) for a random dialog mixing user-action and slot-emission CE."""
    rng = np.random.default_rng(seed)
    P = tiny_user(rng)
    goal = UserGoal({"food": ["thai", "french", "greek"][int(rng.integers(3))]},
                    {"phone"} if rng.random() < 0.5 else set())
    genc = encode_goal(goal, TINY_ONTOLOGY)
    turns = []
    for _ in range(int(rng.integers(2, 4))):
        turns.append((_utt(rng), _utt(rng), int(rng.integers(len(P.actions))),
                      {s: int(rng.integers(len(P.values[s]))) for s in P.slots}))

    def loss(tape):
        st = user_init(P)
        terms = []
        for prev, agent, a, em in turns:
            st, dist = user_step(st, genc, P.enc(prev, tape), P.enc(agent, tape), P, tape)
            terms.append(nn.cross_entropy(dist, a, tape))
            out = emit_slots(st, a, P, tape)
            terms.extend(nn.cross_entropy(out[s], em[s], tape) for s in P.slots)
            st.last_action = a
        return nn.add_scalars(terms, tape)
    return loss, P.parameters()


def value_instance(seed: int):
    rng = np.random.default_rng(seed)
    n_in = int(rng.integers(3, 9))
    V = ValueNet("v", n_in, int(rng.integers(2, 6)), rng)
    _jitter(V, rng)
    X = rng.normal(size=(int(rng.integers(1, 5)), n_in))
    R = rng.normal(size=(X.shape[0], 1))

    def loss(tape):
        return nn.square_error(V(X, tape), R, tape)
    return loss, V.parameters()


# Measured finite-difference roundoff on these instances is ~1e-10 absolute
# (|loss| ~ 10-25 at eps 1e-5); gradients below ~1e-6 cannot be resolved to
# 1e-4 relative, so the relative-error denominator is floored at 1e-5.
GRAD_FLOOR = 1e-5


def worst_gradient_error(instance, max_entries=None, seed=0) -> float:
    loss, params = instance

    def loss_bw():
        nn.zero_grads(params)
        tape = nn.Tape()
        out = loss(tape)
        nn.backward(tape, out)
        return float(out.value)

    return check_gradients(loss_bw, lambda: float(loss(None).value), params, eps=1e-5,
                           max_entries=max_entries, rng=np.random.default_rng(seed), floor=GRAD_FLOOR)


def toy_exact_gradient(mdp, probs: np.ndarray) -> np.ndarray:
    """d J / d logits for the two-turn toy MDP with gamma = 1, by enumeration.

    Uses d log pi(a|s) / d logits[s] = onehot(a) - pi(.|s); nothing from the
    autodiff engine is involved.
    """
    g = np.zeros_like(probs)
    eye = np.eye(probs.shape[1])
    for a1 in range(2):
        for s2 in range(2):
            for a2 in range(2):
                p = probs[0, a1] * mdp.transition(a1)[s2] * probs[s2, a2]
                R = mdp.r1[a1] + mdp.r2[s2, a2]
                g[0] += p * R * (eye[a1] - probs[0])
                g[s2] += p * R * (eye[a2] - probs[s2])
    return g


def toy_gradient_samples(mdp, policy, n: int, rng) -> np.ndarray:
    """(n, *logits.shape) per-episode REINFORCE estimates of d J / d logits."""
    from dialogrl.training.pg import accumulate_policy_gradient, trace_returns

    out = np.empty((n, *policy.logits.value.shape))
    for i in range(n):
        tr = mdp.episode(policy, rng)
        nn.zero_grads([policy.logits])
        accumulate_policy_gradient(tr, "agent", trace_returns(tr, 1.0))
        # the accumulated gradient is of sum nll * R, i.e. minus the ascent direction
        out[i] = -policy.logits.grad
    return out
