from __future__ import annotations

from dataclasses import dataclass

from . import nn
from .language import _PLACEHOLDER, Vocabulary, encode_tokens


@dataclass(frozen=True)
class NetConfig:
    """Layer sizes shared by the agent and user networks.

    The defaults use 150 for every hidden size; ``desk()`` gives a
    smaller setting for single-core experiments.
    """

    emb_dim: int = 50
    utt_hidden: int = 150
    dialog_hidden: int = 150
    mlp_hidden: int = 150
    act_emb_dim: int = 16
    goal_dim: int = 32
    value_hidden: int = 64
    dropout: float = 0.5

    @classmethod
    def desk(cls) -> "NetConfig":
        return cls(emb_dim=24, utt_hidden=32, dialog_hidden=64, mlp_hidden=64, act_emb_dim=8,
                   goal_dim=24, value_hidden=64, dropout=0.1)

    @classmethod
    def tiny(cls) -> "NetConfig":
        return cls(emb_dim=4, utt_hidden=3, dialog_hidden=5, mlp_hidden=4, act_emb_dim=2,
                   goal_dim=3, value_hidden=4, dropout=0.0)


class UtteranceEncoder(nn.Module):
    """Token embeddings plus a bidirectional LSTM; output size is twice the hidden size."""

    def __init__(self, name: str, vocab_size: int, emb_dim: int, hidden: int, rng):
        self.embed = nn.Embedding(f"{name}.embed", vocab_size, emb_dim, rng)
        self.fwd = nn.LstmCell(f"{name}.fwd", emb_dim, hidden, rng)
        self.bwd = nn.LstmCell(f"{name}.bwd", emb_dim, hidden, rng)

    @property
    def out_dim(self) -> int:
        return 2 * self.fwd.hidden_size

    def __call__(self, ids, tape=None) -> nn.Tensor:
        return nn.bilstm_encode(self.embed(ids, tape), self.fwd, self.bwd, tape)

    def encode_text(self, tokens, vocab: Vocabulary, tape=None) -> nn.Tensor:
        return self(encode_tokens(tokens, vocab), tape)


def domain_vocabulary(domain, corpus=None) -> Vocabulary:
    """Every token the templates, ontology, KB and (optionally) a corpus can produce."""
    from .domain.synthetic import DISTRACTORS
    from .language import tokenize

    utts = [DISTRACTORS, ["dontcare", "none"]]
    for ts in (domain.agent_templates, domain.user_templates):
        for variants in ts.templates.values():
            utts.extend(tokenize(_PLACEHOLDER.sub(" ", t)) for t in variants)
    for s in domain.ontology.informable:
        utts.extend(tokenize(v) for v in domain.ontology.informable[s])
    for e in domain.kb.entities:
        utts.append(tokenize(e.name))
        utts.extend(tokenize(str(v)) for v in e.attributes.values())
    if corpus is not None:
        utts.extend(corpus.utterances())
    return Vocabulary.build(utts)
