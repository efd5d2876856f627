"""Run configuration, model bundles and the train/evaluate steps shared by the CLI and experiments."""
from __future__ import annotations

import hashlib
import json
import logging
import platform
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .. import __version__, nn
from ..agent import AgentParams, NeuralAgent
from ..domain import DialogCorpus, Domain, load_domain, load_synthetic_domain, save_domain
from ..domain.synthetic import generate_synthetic_corpus
from ..encoding import NetConfig, domain_vocabulary
from ..language import Vocabulary
from ..training.config import RLConfig, SLConfig, config_to_json, load_config
from ..training.schedule import alternating_train
from ..training.sl import evaluate_agent_sl, evaluate_user_sl, sl_train_agent, sl_train_user
from ..user import NeuralUser, UserParams
from .metrics import emit_curve

log = logging.getLogger("dialogrl")

NET_PRESETS = {"large": NetConfig(), "desk": NetConfig.desk(), "tiny": NetConfig.tiny()}


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run besides the code.

    ``domain`` is a directory in the domain file layout or None for the
    bundled synthetic domain; ``corpus`` a JSONL corpus or None to generate
    ``n_corpus`` synthetic dialogs.  ``net`` is a preset name or a dict of
    :class:`NetConfig` fields.
    """

    domain: str | None = None
    corpus: str | None = None
    n_corpus: int = 1000
    heldout_frac: float = 0.1
    net: object = "large"
    seed: int = 0
    eval_every: int = 100
    eval_n: int = 500
    sl: SLConfig = field(default_factory=SLConfig)
    rl: RLConfig = field(default_factory=RLConfig)

    def net_config(self) -> NetConfig:
        if isinstance(self.net, str):
            if self.net not in NET_PRESETS:
                raise ValueError(f"unknown net preset {self.net!r}; choose from {sorted(NET_PRESETS)}")
            return NET_PRESETS[self.net]
        return NetConfig(**self.net)

    def to_json(self) -> dict:
        run = {k: v for k, v in asdict(self).items() if k not in ("sl", "rl")}
        return config_to_json(self.sl, self.rl, {"run": run})

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


RUN_FIELDS = {"domain", "corpus", "n_corpus", "heldout_frac", "net", "seed", "eval_every", "eval_n"}


def load_run_config(path) -> RunConfig:
    sl, rl, extra = load_config(path)
    run = extra.pop("run", {})
    if extra:
        raise ValueError(f"unknown config sections: {sorted(extra)}")
    unknown = set(run) - RUN_FIELDS
    if unknown:
        raise ValueError(f"unknown run fields: {sorted(unknown)}")
    return RunConfig(sl=sl, rl=rl, **run)


def get_domain(cfg: RunConfig) -> Domain:
    return load_synthetic_domain() if cfg.domain is None else load_domain(cfg.domain)


def get_corpus(cfg: RunConfig, domain: Domain) -> DialogCorpus:
    if cfg.corpus is not None:
        return DialogCorpus.load(cfg.corpus)
    return generate_synthetic_corpus(domain, cfg.n_corpus, np.random.default_rng([cfg.seed, 1]))


def split_corpus(corpus: DialogCorpus, heldout_frac: float) -> tuple[DialogCorpus, DialogCorpus]:
    n_held = int(round(len(corpus) * heldout_frac))
    cut = len(corpus) - n_held
    return corpus[:cut], corpus[cut:]


@dataclass
class ModelBundle:
    domain: Domain
    vocab: Vocabulary
    net: NetConfig
    agent: AgentParams
    user: UserParams

    def wrappers(self, scope: str = "full", cache: bool = False) -> tuple[NeuralAgent, NeuralUser]:
        return (NeuralAgent(self.agent, self.vocab, scope, cache),
                NeuralUser(self.user, self.vocab, self.domain.ontology, scope, cache))

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        save_domain(self.domain, d / "domain")
        (d / "vocab.json").write_text(json.dumps(self.vocab.to_json()) + "\n")
        (d / "net.json").write_text(json.dumps(asdict(self.net), indent=2) + "\n")
        nn.checkpoint.save(d / "agent.ckpt", self.agent.parameters(), {"side": "agent"})
        nn.checkpoint.save(d / "user.ckpt", self.user.parameters(), {"side": "user"})


def new_bundle(domain: Domain, vocab: Vocabulary, net: NetConfig, seed: int) -> ModelBundle:
    rng = np.random.default_rng([seed, 2])
    agent = AgentParams(len(vocab), domain.ontology, domain.actions, domain.p_max, net, rng)
    user = UserParams(len(vocab), domain.ontology, domain.actions, net, rng)
    return ModelBundle(domain, vocab, net, agent, user)


def load_bundle(directory) -> ModelBundle:
    d = Path(directory)
    for name in ("vocab.json", "net.json", "agent.ckpt", "user.ckpt"):
        if not (d / name).exists():
            raise FileNotFoundError(f"{d / name} is missing; expected a model directory")
    domain = load_domain(d / "domain")
    vocab = Vocabulary.from_json(json.loads((d / "vocab.json").read_text()))
    net = NetConfig(**json.loads((d / "net.json").read_text()))
    b = new_bundle(domain, vocab, net, 0)
    nn.checkpoint.load_into(d / "agent.ckpt", b.agent.parameters())
    nn.checkpoint.load_into(d / "user.ckpt", b.user.parameters())
    return b


def write_manifest(out: Path, cfg: RunConfig, command: str, extra: dict | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_json(), indent=2, sort_keys=True) + "\n")
    (out / "seeds.json").write_text(json.dumps({"seed": cfg.seed}) + "\n")
    manifest = {
        "command": command, "config_digest": cfg.digest(), "version": __version__,
        "python": sys.version.split()[0], "numpy": np.__version__, "platform": platform.platform(),
        "rerun": f"python -m dialogrl {command} --config config.json --seed {cfg.seed} --out <dir>",
    }
    manifest.update(extra or {})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def train_sl(cfg: RunConfig, domain: Domain | None = None, corpus: DialogCorpus | None = None):
    """Supervised pre-training of both sides; returns (bundle, {"agent": SLResult, "user": SLResult})."""
    domain = domain or get_domain(cfg)
    corpus = corpus if corpus is not None else get_corpus(cfg, domain)
    train, held = split_corpus(corpus, cfg.heldout_frac)
    vocab = domain_vocabulary(domain, train)
    bundle = new_bundle(domain, vocab, cfg.net_config(), cfg.seed)
    log.info("SL: %d train / %d held-out dialogs, vocab %d", len(train), len(held), len(vocab))
    ra = sl_train_agent(train, bundle.agent, vocab, cfg.sl, np.random.default_rng([cfg.seed, 3]), held)
    log.info("agent SL done: %s", ra.metrics)
    ru = sl_train_user(train, bundle.user, vocab, domain.ontology, cfg.sl,
                       np.random.default_rng([cfg.seed, 4]), held)
    log.info("user SL done: %s", ru.metrics)
    return bundle, {"agent": ra, "user": ru}


def sl_metrics(bundle: ModelBundle, corpus: DialogCorpus) -> dict:
    return {"agent": evaluate_agent_sl(corpus, bundle.agent, bundle.vocab),
            "user": evaluate_user_sl(corpus, bundle.user, bundle.vocab, bundle.domain.ontology)}


def train_rl(bundle: ModelBundle, cfg: RunConfig, **kw):
    """Alternating RL on top of ``bundle`` (modified in place); returns the TrainingLog."""
    agent, user = bundle.wrappers(cfg.rl.scope, cache=True)
    return alternating_train(agent, user, bundle.domain, cfg.rl, np.random.default_rng([cfg.seed, 5]),
                             eval_every=cfg.eval_every, eval_n=cfg.eval_n,
                             eval_rng=np.random.default_rng([cfg.seed, 6]), **kw)


def save_training_log(tlog, out: Path) -> None:
    if len(tlog.curve):
        emit_curve(tlog.curve, out / "curve.csv")
    rows = ["cycle,side,episodes,success_rate,avg_reward,avg_success_turns"]
    for c in tlog.cycles:
        t = "" if c.avg_success_turns is None else repr(c.avg_success_turns)
        rows.append(f"{c.cycle},{c.side},{c.episodes},{c.success_rate!r},{c.avg_reward!r},{t}")
    (out / "cycles.csv").write_text("\n".join(rows) + "\n")


def with_overrides(cfg: RunConfig, **changes) -> RunConfig:
    """Copy of ``cfg`` with top-level, ``sl.*`` or ``rl.*`` fields replaced (None values ignored)."""
    top, sl, rl = {}, {}, {}
    for k, v in changes.items():
        if v is None:
            continue
        if k.startswith("sl_"):
            sl[k[3:]] = v
        elif k.startswith("rl_"):
            rl[k[3:]] = v
        else:
            top[k] = v
    return replace(cfg, sl=replace(cfg.sl, **sl), rl=replace(cfg.rl, **rl), **top)
