"""The comparison of training regimes: SL baseline versus agent-only and joint RL.

Every (seed, arm) result is cached as JSON under ``cache_dir`` keyed by a
hash of everything that determines it, so interrupted runs resume and
repeated test runs are cheap.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..training.config import RLConfig, SLConfig
from ..training.schedule import rollout_config
from .metrics import evaluate
from .pipeline import ModelBundle, RunConfig, load_bundle, train_rl, train_sl

log = logging.getLogger("dialogrl.experiment")

ARMS = (("reinforce", "agent-only"), ("reinforce", "joint"), ("a2c", "agent-only"), ("a2c", "joint"))


@dataclass(frozen=True)
class ExperimentConfig:
    seeds: tuple = (0, 1, 2)
    episodes: int = 20000
    net: str = "desk"
    n_corpus: int = 1000
    sl: SLConfig = field(default_factory=lambda: SLConfig(lr=3e-3, epochs=8, dropout=0.1, batch_size=8))
    rl: RLConfig = field(default_factory=RLConfig)
    eval_every: int = 1000
    eval_n: int = 300
    final_eval_n: int = 1000


def _key(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()[:16]


def run_config(cfg: ExperimentConfig, seed: int, algorithm: str = "reinforce", mode: str = "joint") -> RunConfig:
    rl = replace(cfg.rl, algorithm=algorithm, mode=mode, total_episodes=cfg.episodes)
    return RunConfig(n_corpus=cfg.n_corpus, net=cfg.net, seed=seed, eval_every=cfg.eval_every,
                     eval_n=cfg.eval_n, sl=cfg.sl, rl=rl)


def sl_bundle(cfg: ExperimentConfig, seed: int, cache_dir: Path) -> ModelBundle:
    rc = run_config(cfg, seed)
    d = cache_dir / f"sl-{_key([seed, cfg.net, cfg.n_corpus, asdict(cfg.sl)])}"
    if not (d / "agent.ckpt").exists():
        log.info("seed %d: supervised pre-training", seed)
        bundle, res = train_sl(rc)
        bundle.save(d)
        (d / "sl_metrics.json").write_text(json.dumps(
            {s: {"epoch_losses": r.epoch_losses, "heldout": r.metrics} for s, r in res.items()}, indent=2))
    return load_bundle(d)


def final_eval(bundle: ModelBundle, cfg: ExperimentConfig, seed: int) -> dict:
    agent, user = bundle.wrappers(cache=True)
    rep = evaluate(agent, user, bundle.domain, cfg.final_eval_n, np.random.default_rng([seed, 99]),
                   rollout_config(cfg.rl), seed=seed)
    return rep.to_json()


def run_arm(cfg: ExperimentConfig, seed: int, arm: tuple | None, cache_dir) -> dict:
    """Result for one seed; ``arm=None`` is the SL baseline."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    name = "sl" if arm is None else f"{arm[0]}-{arm[1]}"
    path = cache_dir / f"{name}-{seed}-{_key([asdict(cfg), seed, name])}.json"
    if path.exists():
        return json.loads(path.read_text())
    bundle = sl_bundle(cfg, seed, cache_dir)
    out = {"arm": name, "seed": seed}
    if arm is not None:
        log.info("seed %d: %s RL for %d episodes", seed, name, cfg.episodes)
        tlog = train_rl(bundle, run_config(cfg, seed, *arm))
        out["curve"] = [[e, r.to_json()] for e, r in tlog.curve.points]
        out["cycles"] = [asdict(c) for c in tlog.cycles]
    out["final"] = final_eval(bundle, cfg, seed)
    path.write_text(json.dumps(out, indent=1))
    return out


def run_experiment(cfg: ExperimentConfig, cache_dir, arms=ARMS) -> dict:
    """{arm name: [per-seed results]} including the "sl" baseline."""
    results = {"sl": [run_arm(cfg, s, None, cache_dir) for s in cfg.seeds]}
    for arm in arms:
        results[f"{arm[0]}-{arm[1]}"] = [run_arm(cfg, s, arm, cache_dir) for s in cfg.seeds]
    return results


def summarize(results: dict) -> dict:
    """Seed-mean final metrics per arm."""
    out = {}
    for name, runs in results.items():
        fin = [r["final"] for r in runs]
        turns = [f["avg_success_turns"] for f in fin if f["avg_success_turns"] is not None]
        out[name] = {"success_rate": float(np.mean([f["success_rate"] for f in fin])),
                     "avg_reward": float(np.mean([f["avg_reward"] for f in fin])),
                     "avg_success_turns": float(np.mean(turns)) if turns else None,
                     "seeds": len(runs)}
    return out


def format_table(summary: dict) -> str:
    lines = [f"{'arm':<22} {'success %':>10} {'avg reward':>11} {'succ turns':>11}"]
    for name, s in summary.items():
        t = "-" if s["avg_success_turns"] is None else f"{s['avg_success_turns']:.2f}"
        lines.append(f"{name:<22} {100 * s['success_rate']:>10.1f} {s['avg_reward']:>11.3f} {t:>11}")
    return "\n".join(lines)


def quarter_turns(run: dict) -> tuple[float, float]:
    """Mean success-dialog length over the first and last quarter of the learning curve."""
    pts = [p for p in run["curve"] if p[1]["avg_success_turns"] is not None]
    q = max(len(pts) // 4, 1)
    first = np.mean([p[1]["avg_success_turns"] for p in pts[:q]])
    last = np.mean([p[1]["avg_success_turns"] for p in pts[-q:]])
    return float(first), float(last)
