"""The neural dialog agent.

Each turn the dialog LSTM reads the encoding of the agent's previous
response, the current user utterance, the KB flag and an embedding of the
previous agent action.  Three heads read the new dialog state: the system
action distribution, one belief distribution per informable slot and the
entity pointer over ``p_max`` result positions plus a final "no entity" class.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .domain import ApiCall, NONE
from .encoding import NetConfig, UtteranceEncoder
from .language import Vocabulary, encode_tokens
from .protocol import AgentDecision

SCOPES = ("full", "head")


class AgentParams(nn.Module):
    def __init__(self, vocab_size: int, ontology, actions, p_max: int, cfg: NetConfig, rng):
        self.cfg = cfg
        self.slots = list(ontology.informable)
        self.values = {s: ontology.values(s) for s in self.slots}
        self.actions = list(actions.agent)
        self.p_max = p_max
        self.enc = UtteranceEncoder("enc", vocab_size, cfg.emb_dim, cfg.utt_hidden, rng)
        # the extra row stands for "no previous action" at turn 1
        self.prev_act = nn.Embedding("prev_act", len(self.actions) + 1, cfg.act_emb_dim, rng)
        n_in = 2 * self.enc.out_dim + 1 + cfg.act_emb_dim
        self.dialog = nn.LstmCell("dialog", n_in, cfg.dialog_hidden, rng)
        H, M = cfg.dialog_hidden, cfg.mlp_hidden
        self.act = nn.MLP("act", H, M, len(self.actions), rng)
        self.belief = {s: nn.MLP(f"belief.{s}", H, M, len(self.values[s]), rng) for s in self.slots}
        self.pointer = nn.MLP("pointer", H, M, p_max + 1, rng)

    @property
    def start_action(self) -> int:
        return len(self.actions)


@dataclass
class BeliefState:
    """Per-slot probability vectors over ``values[slot]``."""

    values: dict
    dists: dict

    def argmax(self) -> dict:
        # np.argmax returns the lowest index among ties
        return {s: self.values[s][int(np.argmax(p))] for s, p in self.dists.items()}


@dataclass
class AgentState:
    h: nn.Tensor
    c: nn.Tensor
    last_action: int
    belief: BeliefState
    pointer: np.ndarray
    entity: object = None
    fulfilled: set = field(default_factory=set)


def agent_init(params: AgentParams) -> AgentState:
    h, c = params.dialog.zero_state()
    dists = {}
    for s in params.slots:
        p = np.zeros(len(params.values[s]))
        p[params.values[s].index(NONE)] = 1.0
        dists[s] = p
    pointer = np.zeros(params.p_max + 1)
    pointer[0] = 1.0
    return AgentState(h, c, params.start_action, BeliefState(params.values, dists), pointer)


def agent_step(state: AgentState, prev_agent_utt_enc: nn.Tensor, user_utt_enc: nn.Tensor,
               kb_enc: int, params: AgentParams, tape: nn.Tape | None = None, *,
               dropout: float = 0.0, training: bool = False, rng=None):
    """One dialog turn; returns (new state, action dist, belief dists, pointer dist).

    The new state's belief and pointer are numpy copies of the head outputs;
    the returned distributions are tensors so losses can be taped on them.
    """
    if kb_enc not in (0, 1):
        raise ValueError(f"kb_enc must be 0 or 1, got {kb_enc!r}")
    act_vec = params.prev_act.row(state.last_action, tape)
    x = nn.concat([prev_agent_utt_enc, user_utt_enc, nn.Tensor(np.array([float(kb_enc)])), act_vec], tape)
    h, c = nn.lstm_step(params.dialog, x, state.h, state.c, tape)
    kw = dict(dropout=dropout, training=training, rng=rng)
    action_dist = params.act(h, tape, **kw)
    belief_dists = {s: params.belief[s](h, tape, **kw) for s in params.slots}
    pointer_dist = params.pointer(h, tape, **kw)
    new = AgentState(h, c, state.last_action,
                     BeliefState(params.values, {s: d.value.copy() for s, d in belief_dists.items()}),
                     pointer_dist.value.copy(), state.entity, set(state.fulfilled))
    return new, action_dist, belief_dists, pointer_dist


def select_action(action_dist, mode: str, rng: np.random.Generator | None = None) -> int:
    """Greedy picks the lowest-index argmax; softmax samples from the distribution."""
    p = np.asarray(action_dist.value if isinstance(action_dist, nn.Tensor) else action_dist,
                   dtype=np.float64)
    if mode == "greedy":
        return int(np.argmax(p))
    if mode != "softmax":
        raise ValueError(f"unknown policy mode {mode!r}")
    cdf = np.cumsum(p)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    # guard against landing past the end or on a zero-probability entry
    i = min(i, len(p) - 1)
    while p[i] == 0.0 and i > 0:
        i -= 1
    return i


def build_api_call(belief) -> ApiCall:
    """Constraints from per-slot argmax values; ``none`` is dropped, ``dontcare`` kept."""
    values = belief.argmax() if isinstance(belief, BeliefState) else belief
    return ApiCall({s: v for s, v in values.items() if v != NONE})


def resolve_entity(pointer_dist, results, mode: str = "greedy", rng=None):
    """Entity at the selected pointer position and that position.

    The last position means "no entity"; so does any position past the end
    of ``results``.  Returns (None, None) when nothing is selected.
    """
    if not results:
        return None, None
    p = np.asarray(pointer_dist, dtype=np.float64)
    idx = select_action(p, mode, rng)
    if idx >= len(p) - 1 or idx >= len(results):
        return None, None
    return results[idx], idx


class NeuralAgent:
    """Policy wrapper used by the simulator.

    ``scope`` decides what a recorded tape covers: ``"full"`` tapes the whole
    network, ``"head"`` runs encoders and the dialog LSTM untaped and tapes
    only the action head.  With ``cache=True`` utterance encodings are
    memoized across episodes; only valid while the encoder is not trained,
    so call :meth:`clear_cache` after any update that touches it.
    """

    def __init__(self, params: AgentParams, vocab: Vocabulary, scope: str = "full", cache: bool = False):
        if scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}")
        self.params = params
        self.vocab = vocab
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

    def start(self, rng=None) -> "AgentSession":
        return AgentSession(self)


class AgentSession:
    def __init__(self, owner: NeuralAgent):
        self.o = owner
        self.state = agent_init(owner.params)

    def act(self, obs, tape=None, mode: str = "greedy", rng=None) -> AgentDecision:
        P = self.o.params
        full = tape if self.o.scope == "full" else None
        prev = self.o.encode(obs.prev_agent_utt, full)
        user = self.o.encode(obs.user_utt, full)
        self.state, dist, bdists, pdist = agent_step(self.state, prev, user, obs.kb_flag, P, full)
        if tape is not None and full is None:
            dist = P.act(nn.Tensor(self.state.h.value), tape)
        a = select_action(dist, mode, rng)
        self.state.last_action = a
        nll = nn.cross_entropy(dist, a, tape) if tape is not None else None
        belief = self.state.belief
        return AgentDecision(P.actions[a], a, belief.argmax(), self.state.pointer, nll,
                             self.state.h.value, belief.dists)
