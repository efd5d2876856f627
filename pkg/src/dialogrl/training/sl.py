"""Supervised pre-training of the agent and the user simulator with teacher forcing."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import nn
from ..agent import AgentParams, agent_init, agent_step
from ..domain import DONTCARE
from ..language import Vocabulary, encode_tokens
from ..user import UserParams, emit_slots, encode_goal, surfaced_slots, user_init, user_step
from .config import SLConfig


@dataclass
class SLResult:
    epoch_losses: list = field(default_factory=list)
    step_losses: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)


def _check_nonempty(corpus) -> None:
    if len(corpus) == 0 or all(len(d.turns) == 0 for d in corpus):
        raise ValueError("cannot train on an empty corpus")


def pointer_label(turn, p_max: int) -> int:
    if turn.pointer is None or turn.pointer >= p_max:
        return p_max
    return int(turn.pointer)


def agent_dialog_loss(dialog, params: AgentParams, vocab: Vocabulary, cfg: SLConfig,
                      tape: nn.Tape | None, *, training: bool = False, rng=None, weight: float = 1.0):
    """Weighted teacher-forced loss of one dialog plus per-head hit counts."""
    state = agent_init(params)
    terms, weights = [], []
    hits = {"act": 0, "belief": 0, "pointer": 0, "turns": 0, "slots": 0}
    prev_utt: list = []
    act_ids = {a: i for i, a in enumerate(params.actions)}
    for t in dialog.turns:
        prev = params.enc(encode_tokens(prev_utt, vocab), tape)
        user = params.enc(encode_tokens(t.user_utt, vocab), tape)
        state, adist, bdists, pdist = agent_step(state, prev, user, int(t.kb_flag), params, tape,
                                                 dropout=cfg.dropout, training=training, rng=rng)
        a = act_ids[t.agent_act]
        terms.append(nn.cross_entropy(adist, a, tape))
        weights.append(cfg.lam_act * weight)
        hits["act"] += int(np.argmax(adist.value)) == a
        for s in params.slots:
            v = params.values[s].index(t.belief.get(s, "none"))
            terms.append(nn.cross_entropy(bdists[s], v, tape))
            weights.append(cfg.lam_slot * weight)
            hits["belief"] += int(np.argmax(bdists[s].value)) == v
            hits["slots"] += 1
        pl = pointer_label(t, params.p_max)
        terms.append(nn.cross_entropy(pdist, pl, tape))
        weights.append(cfg.lam_ptr * weight)
        hits["pointer"] += int(np.argmax(pdist.value)) == pl
        hits["turns"] += 1
        # teacher forcing: the next turn sees the reference action and response
        state.last_action = a
        prev_utt = t.agent_utt
    return nn.weighted_sum(terms, weights, tape), hits


def user_emission_labels(turn, goal, params: UserParams) -> dict:
    """Surfaced value if the turn carries one, else the goal value, else dontcare."""
    out = {}
    for s in params.slots:
        v = turn.user_slots.get(s) or goal.informables.get(s, DONTCARE)
        out[s] = params.values[s].index(v)
    return out


def user_dialog_loss(dialog, params: UserParams, vocab: Vocabulary, ontology, cfg: SLConfig,
                     tape: nn.Tape | None, *, training: bool = False, rng=None, weight: float = 1.0,
                     goal_enc: np.ndarray | None = None):
    state = user_init(params)
    g = nn.Tensor(encode_goal(dialog.goal, ontology) if goal_enc is None else goal_enc)
    terms, weights = [], []
    hits = {"act": 0, "turns": 0, "slot": 0, "slots": 0}
    prev_user: list = []
    agent_utt: list = []
    act_ids = {a: i for i, a in enumerate(params.actions)}
    kw = dict(dropout=cfg.dropout, training=training, rng=rng)
    for t in dialog.turns:
        pu = params.enc(encode_tokens(prev_user, vocab), tape)
        au = params.enc(encode_tokens(agent_utt, vocab), tape)
        state, dist = user_step(state, g, pu, au, params, tape, **kw)
        a = act_ids[t.user_act]
        terms.append(nn.cross_entropy(dist, a, tape))
        weights.append(cfg.lam_act * weight)
        hits["act"] += int(np.argmax(dist.value)) == a
        hits["turns"] += 1
        emitted = emit_slots(state, a, params, tape, **kw)
        labels = user_emission_labels(t, dialog.goal, params)
        surfaced = set(surfaced_slots(t.user_act, params.slots))
        for s in params.slots:
            terms.append(nn.cross_entropy(emitted[s], labels[s], tape))
            weights.append(cfg.lam_slot * weight)
            if s in surfaced:
                hits["slot"] += int(np.argmax(emitted[s].value)) == labels[s]
                hits["slots"] += 1
        state.last_action = a
        prev_user, agent_utt = t.user_utt, t.agent_utt
    return nn.weighted_sum(terms, weights, tape), hits


def _accuracies(total: dict, keys: dict) -> dict:
    return {name: total[num] / total[den] if total[den] else float("nan")
            for name, (num, den) in keys.items()}


AGENT_METRICS = {"act_acc": ("act", "turns"), "belief_acc": ("belief", "slots"),
                 "pointer_acc": ("pointer", "turns")}
USER_METRICS = {"act_acc": ("act", "turns"), "slot_acc": ("slot", "slots")}


def _evaluate(loss_fn, corpus, metric_keys) -> dict:
    total: dict = {}
    loss = 0.0
    for d in corpus:
        l, h = loss_fn(d)
        loss += float(l.value)
        for k, v in h.items():
            total[k] = total.get(k, 0) + v
    out = _accuracies(total, metric_keys)
    out["loss_per_turn"] = loss / max(total.get("turns", 0), 1)
    return out


def _train(params, corpus, cfg: SLConfig, rng, loss_fn, eval_fn, heldout, max_steps=None) -> SLResult:
    _check_nonempty(corpus)
    opt = nn.AdamState(lr=cfg.lr)
    ps = params.parameters()
    res = SLResult()
    dialogs = list(corpus)
    steps = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(len(dialogs))
        epoch_loss, epoch_turns = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            batch = [dialogs[i] for i in order[start:start + cfg.batch_size]]
            n_turns = sum(len(d.turns) for d in batch)
            if n_turns == 0:
                continue
            batch_loss = 0.0
            for d in batch:
                tape = nn.Tape()
                loss, _ = loss_fn(d, tape, 1.0 / n_turns)
                nn.backward(tape, loss)
                batch_loss += float(loss.value)
            if cfg.clip > 0:
                nn.clip_grad_norm(ps, cfg.clip)
            nn.adam_step(ps, opt)
            res.step_losses.append(batch_loss)
            epoch_loss += batch_loss * n_turns
            epoch_turns += n_turns
            steps += 1
            if max_steps is not None and steps >= max_steps:
                break
        res.epoch_losses.append(epoch_loss / max(epoch_turns, 1))
        if max_steps is not None and steps >= max_steps:
            break
    if heldout is not None and len(heldout):
        res.metrics = eval_fn(heldout)
    return res


def sl_train_agent(corpus, params: AgentParams, vocab: Vocabulary, cfg: SLConfig,
                   rng: np.random.Generator, heldout=None, max_steps: int | None = None) -> SLResult:
    """Minimize the weighted action, belief and pointer cross-entropies; loss is per turn."""
    def loss_fn(d, tape, w):
        return agent_dialog_loss(d, params, vocab, cfg, tape, training=True, rng=rng, weight=w)
    return _train(params, corpus, cfg, rng, loss_fn,
                  lambda c: evaluate_agent_sl(c, params, vocab, cfg), heldout, max_steps)


def sl_train_user(corpus, params: UserParams, vocab: Vocabulary, ontology, cfg: SLConfig,
                  rng: np.random.Generator, heldout=None, max_steps: int | None = None) -> SLResult:
    def loss_fn(d, tape, w):
        return user_dialog_loss(d, params, vocab, ontology, cfg, tape, training=True, rng=rng, weight=w)
    return _train(params, corpus, cfg, rng, loss_fn,
                  lambda c: evaluate_user_sl(c, params, vocab, ontology, cfg), heldout, max_steps)


def evaluate_agent_sl(corpus, params: AgentParams, vocab: Vocabulary, cfg: SLConfig = SLConfig()) -> dict:
    """Teacher-forced per-head accuracies (no dropout)."""
    return _evaluate(lambda d: agent_dialog_loss(d, params, vocab, cfg, None), corpus, AGENT_METRICS)


def evaluate_user_sl(corpus, params: UserParams, vocab: Vocabulary, ontology, cfg: SLConfig = SLConfig(),
                     goal_encodings: list | None = None) -> dict:
    """Teacher-forced user accuracies; ``goal_encodings`` overrides each dialog's goal (for ablations)."""
    dialogs = list(corpus)
    encs = goal_encodings or [None] * len(dialogs)
    pairs = dict(zip(map(id, dialogs), encs))
    return _evaluate(lambda d: user_dialog_loss(d, params, vocab, ontology, cfg, None,
                                                goal_enc=pairs[id(d)]), dialogs, USER_METRICS)
