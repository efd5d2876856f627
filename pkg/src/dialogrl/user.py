"""The neural user simulator.

The user's dialog LSTM reads a projection of the fixed goal encoding, its
own previous utterance, the latest agent utterance and an embedding of its
previous action.  The action head picks the next user act; per-slot
emission heads, conditioned on the chosen act, supply informable values.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .agent import select_action
from .domain import DONTCARE, NONE, split_act
from .encoding import NetConfig, UtteranceEncoder
from .language import Vocabulary, encode_tokens
from .protocol import UserDecision


def goal_encoding_size(ontology) -> int:
    return sum(len(ontology.values(s)) for s in ontology.informable) + len(ontology.requestable)


def encode_goal(goal, ontology) -> np.ndarray:
    """One-hot block per informable slot (``none`` marks a slot outside the goal), then a request bitmap."""
    parts = []
    for s in ontology.informable:
        block = np.zeros(len(ontology.values(s)))
        block[ontology.value_index(s, goal.informables.get(s, NONE))] = 1.0
        parts.append(block)
    parts.append(np.array([1.0 if r in goal.requests else 0.0 for r in ontology.requestable]))
    unknown = set(goal.requests) - set(ontology.requestable)
    if unknown:
        raise ValueError(f"goal requests unknown slots {sorted(unknown)}")
    return np.concatenate(parts)


def emission_values(ontology, slot: str) -> list:
    return list(ontology.informable[slot]) + [DONTCARE]


class UserParams(nn.Module):
    def __init__(self, vocab_size: int, ontology, actions, cfg: NetConfig, rng):
        self.cfg = cfg
        self.slots = list(ontology.informable)
        self.values = {s: emission_values(ontology, s) for s in self.slots}
        self.actions = list(actions.user)
        self.terminal = frozenset(actions.terminal)
        self.goal_size = goal_encoding_size(ontology)
        self.enc = UtteranceEncoder("enc", vocab_size, cfg.emb_dim, cfg.utt_hidden, rng)
        self.goal = nn.DenseLayer("goal", self.goal_size, cfg.goal_dim, "tanh", rng)
        self.prev_act = nn.Embedding("prev_act", len(self.actions) + 1, cfg.act_emb_dim, rng)
        n_in = cfg.goal_dim + 2 * self.enc.out_dim + cfg.act_emb_dim
        self.dialog = nn.LstmCell("dialog", n_in, cfg.dialog_hidden, rng)
        H, M = cfg.dialog_hidden, cfg.mlp_hidden
        self.act = nn.MLP("act", H, M, len(self.actions), rng)
        self.act_embed = nn.Embedding("act_embed", len(self.actions), cfg.act_emb_dim, rng)
        self.emit = {s: nn.MLP(f"emit.{s}", H + cfg.act_emb_dim, M, len(self.values[s]), rng)
                     for s in self.slots}

    @property
    def start_action(self) -> int:
        return len(self.actions)


@dataclass
class UserState:
    h: nn.Tensor
    c: nn.Tensor
    last_action: int


def user_init(params: UserParams) -> UserState:
    h, c = params.dialog.zero_state()
    return UserState(h, c, params.start_action)


def user_step(state: UserState, goal_enc, prev_user_utt_enc: nn.Tensor, agent_utt_enc: nn.Tensor,
              params: UserParams, tape: nn.Tape | None = None, *, dropout: float = 0.0,
              training: bool = False, rng=None):
    """Returns (new state, action distribution)."""
    g = goal_enc if isinstance(goal_enc, nn.Tensor) else nn.Tensor(goal_enc)
    if g.shape != (params.goal_size,):
        raise nn.DimensionError(f"goal encoding has shape {g.shape}, expected ({params.goal_size},)")
    gp = nn.dense_forward(g, params.goal, tape)
    act_vec = params.prev_act.row(state.last_action, tape)
    x = nn.concat([gp, prev_user_utt_enc, agent_utt_enc, act_vec], tape)
    h, c = nn.lstm_step(params.dialog, x, state.h, state.c, tape)
    dist = params.act(h, tape, dropout=dropout, training=training, rng=rng)
    return UserState(h, c, state.last_action), dist


def emit_slots(state: UserState, action_id: int, params: UserParams, tape: nn.Tape | None = None, *,
               dropout: float = 0.0, training: bool = False, rng=None) -> dict:
    """Per-slot value distributions over ``params.values[slot]`` given the chosen act."""
    x = nn.concat([state.h, params.act_embed.row(action_id, tape)], tape)
    return {s: params.emit[s](x, tape, dropout=dropout, training=training, rng=rng)
            for s in params.slots}


def select_user_action(action_dist, rng: np.random.Generator) -> int:
    return select_action(action_dist, "softmax", rng)


def is_terminal(action_id: int, vocab) -> bool:
    return vocab.user[action_id] in vocab.terminal


def surfaced_slots(act: str, slots) -> list:
    """Informable slots named in a flattened user act, e.g. inform_area_food -> [area, food]."""
    return split_act(act, slots)[1]


class NeuralUser:
    """Policy wrapper mirroring :class:`dialogrl.agent.NeuralAgent`."""

    def __init__(self, params: UserParams, vocab: Vocabulary, ontology, scope: str = "full",
                 cache: bool = False):
        if scope not in ("full", "head"):
            raise ValueError("scope must be 'full' or 'head'")
        self.params = params
        self.vocab = vocab
        self.ontology = ontology
        self.scope = scope
        self.cache = cache
        self._enc_cache: dict = {}

    def clear_cache(self) -> None:
        self._enc_cache.clear()

    def encode(self, tokens, tape=None) -> nn.Tensor:
        ids = encode_tokens(tokens, self.vocab)
        if tape is not None or not self.cache:
            return self.params.enc(ids, tape)
        key = tuple(ids)
        out = self._enc_cache.get(key)
        if out is None:
            if len(self._enc_cache) > 100_000:
                self._enc_cache.clear()
            out = self._enc_cache[key] = self.params.enc(ids)
        return out

    def start(self, goal) -> "UserSession":
        return UserSession(self, goal)


class UserSession:
    def __init__(self, owner: NeuralUser, goal):
        self.o = owner
        self.goal = goal
        self.goal_enc = nn.Tensor(encode_goal(goal, owner.ontology))
        self.state = user_init(owner.params)

    def act(self, obs, tape=None, mode: str = "softmax", rng=None) -> UserDecision:
        P = self.o.params
        full = tape if self.o.scope == "full" else None
        prev = self.o.encode(obs.prev_user_utt, full)
        agent = self.o.encode(obs.agent_utt, full)
        self.state, dist = user_step(self.state, self.goal_enc, prev, agent, P, full)
        if tape is not None and full is None:
            dist = P.act(nn.Tensor(self.state.h.value), tape)
        a = select_action(dist, mode, rng)
        self.state.last_action = a
        nll = nn.cross_entropy(dist, a, tape) if tape is not None else None
        act = P.actions[a]
        slots = {}
        names = surfaced_slots(act, P.slots)
        if names:
            emitted = emit_slots(self.state, a, P)
            # values are taken greedily; only the act itself is sampled
            slots = {s: P.values[s][int(np.argmax(emitted[s].value))] for s in names}
        return UserDecision(act, a, slots, nll, self.state.h.value)
