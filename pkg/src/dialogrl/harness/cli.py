"""Command line entry point: ``python -m dialogrl <subcommand> ...``.

Every subcommand accepts ``--config``, ``--seed`` and ``--out``.  Usage
errors and missing input files exit with status 2.  Set ``DF_LOG`` to
error, warn, info or debug to control log output (default warn).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from ..domain import DialogCorpus, sample_goal, save_domain, validate_corpus
from ..domain.synthetic import generate_synthetic_corpus
from ..training.rollout import run_episode
from ..training.schedule import rollout_config
from .chat import chat_repl
from .metrics import evaluate
from . import pipeline as P

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


def setup_logging() -> None:
    level = os.environ.get("DF_LOG", "warn").lower()
    if level not in LOG_LEVELS:
        raise UsageError(f"DF_LOG must be one of {sorted(set(LOG_LEVELS) - {'warning'})}, got {level!r}")
    logging.basicConfig(level=LOG_LEVELS[level], format="%(levelname)s %(name)s: %(message)s")


def _run_config(args) -> P.RunConfig:
    cfg = P.load_run_config(args.config) if args.config else P.RunConfig()
    return P.with_overrides(cfg, seed=args.seed)


def _out(args, default: str) -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def transcript_rows(trace, dialog_id: str) -> list:
    """Two JSON-lines rows per turn, one per speaker."""
    rows = []
    for r in trace.transcript:
        base = {"dialog": dialog_id, "turn": r["turn"]}
        rows.append({**base, "speaker": "user", "act": r["user_act"], "slots": r["user_slots"],
                     "utterance": " ".join(r["user_utt"])})
        rows.append({**base, "speaker": "agent", "act": r["agent_act"], "slots": r["api_call"] or {},
                     "utterance": " ".join(r["agent_utt"]), "belief": r["belief"],
                     "pointer": r["pointer"], "entity": r["entity"], "kb_flag": r["kb_flag"],
                     "reward": r["reward"]})
    return rows


def cmd_gen_corpus(args) -> int:
    cfg = _run_config(args)
    domain = P.get_domain(cfg)
    n = args.n if args.n is not None else cfg.n_corpus
    corpus = generate_synthetic_corpus(domain, n, np.random.default_rng([cfg.seed, 1]))
    validate_corpus(corpus, domain.ontology, domain.actions, domain.p_max)
    out = _out(args, "corpus")
    corpus.save(out / "corpus.jsonl")
    save_domain(domain, out / "domain")
    print(f"wrote {len(corpus)} dialogs (mean {corpus.mean_turns():.2f} turns) to {out / 'corpus.jsonl'}")
    return 0


def cmd_train_sl(args) -> int:
    cfg = P.with_overrides(_run_config(args), corpus=args.corpus, sl_epochs=args.epochs)
    out = _out(args, "run-sl")
    P.write_manifest(out, cfg, "train-sl")
    bundle, res = P.train_sl(cfg)
    bundle.save(out / "models")
    metrics = {side: {"epoch_losses": r.epoch_losses, "heldout": r.metrics} for side, r in res.items()}
    (out / "sl_metrics.json").write_text(json.dumps(metrics, indent=2) + "\n")
    for side, r in res.items():
        print(side, " ".join(f"{k}={v:.4f}" for k, v in r.metrics.items()))
    return 0


def cmd_train_rl(args) -> int:
    cfg = P.with_overrides(_run_config(args), rl_mode=args.mode, rl_algorithm=args.algorithm,
                           rl_total_episodes=args.episodes)
    bundle = P.load_bundle(args.models)
    out = _out(args, "run-rl")
    P.write_manifest(out, cfg, "train-rl", {"init_models": str(Path(args.models).resolve())})
    tlog = P.train_rl(bundle, cfg)
    bundle.save(out / "models")
    P.save_training_log(tlog, out)
    if len(tlog.curve):
        ep, rep = tlog.curve.points[-1]
        print(f"episode {ep}:\n{rep.table()}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _run_config(args)
    bundle = P.load_bundle(args.models)
    agent, user = bundle.wrappers(cache=True)
    n = args.n if args.n is not None else cfg.eval_n
    rep = evaluate(agent, user, bundle.domain, n, np.random.default_rng([cfg.seed, 7]),
                   rollout_config(cfg.rl), seed=cfg.seed)
    out = _out(args, "eval")
    (out / "report.json").write_text(json.dumps(rep.to_json(), indent=2) + "\n")
    (out / "report.txt").write_text(rep.table() + "\n")
    print(rep.table())
    return 0


def cmd_simulate(args) -> int:
    cfg = _run_config(args)
    bundle = P.load_bundle(args.models)
    agent, user = bundle.wrappers()
    rng = np.random.default_rng([cfg.seed, 8])
    out = _out(args, "sim")
    rcfg = rollout_config(cfg.rl)
    with (out / "transcripts.jsonl").open("w") as fh:
        for i in range(args.n):
            goal = sample_goal(bundle.domain.ontology, bundle.domain.kb, rng)
            tr = run_episode(agent, user, bundle.domain, goal, rcfg, rng, agent_mode="greedy")
            for row in transcript_rows(tr, f"sim-{i:05d}"):
                fh.write(json.dumps(row, sort_keys=True) + "\n")
            print(f"sim-{i:05d}: {tr.turns} turns, success={tr.success}, reward={tr.total_reward:.3f}")
    return 0


def cmd_chat(args) -> int:
    bundle = P.load_bundle(args.models)
    agent, _ = bundle.wrappers()
    out = _out(args, "chat")
    seed = args.seed if args.seed is not None else 0
    chat_repl(agent, bundle.domain, rng=np.random.default_rng(seed), transcript_path=out / "transcript.jsonl")
    print(f"transcript saved to {out / 'transcript.jsonl'}")
    return 0


def cmd_ingest_dstc2(args) -> int:
    from ..domain import dstc2
    from ..domain import Domain

    res = dstc2.ingest(args.root)
    out = _out(args, "dstc2")
    agent_t, user_t = res["templates"]
    save_domain(Domain(res["ontology"], res["kb"], res["actions"], agent_t, user_t), out / "domain")
    for split, corpus in res["splits"].items():
        corpus.save(out / f"{split}.jsonl")
    stats = dstc2.statistics(res)
    (out / "stats.json").write_text(json.dumps(stats, indent=2) + "\n")
    d = stats["dialogs"]
    print(f"train/dev/test dialogs: {d['train']} / {d['dev']} / {d['test']}")
    print(f"turns per dialog: {stats['mean_turns']:.2f}")
    print(f"agent / user actions: {stats['agent_actions']} / {stats['user_actions']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file with optional run/sl/rl sections")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--out", help="output directory")

    p = argparse.ArgumentParser(prog="dialogrl", description="Joint RL for a neural dialog agent and user simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-corpus", parents=[common], help="generate a synthetic labeled corpus")
    s.add_argument("--n", type=int, help="number of dialogs")
    s.set_defaults(fn=cmd_gen_corpus)

    s = sub.add_parser("train-sl", parents=[common], help="supervised pre-training of both agents")
    s.add_argument("--corpus", help="JSONL corpus (default: generate synthetic)")
    s.add_argument("--epochs", type=int)
    s.set_defaults(fn=cmd_train_sl)

    s = sub.add_parser("train-rl", parents=[common], help="alternating policy-gradient training")
    s.add_argument("--models", required=True, help="model directory from train-sl or train-rl")
    s.add_argument("--mode", choices=["joint", "agent-only"])
    s.add_argument("--algorithm", choices=["reinforce", "a2c"])
    s.add_argument("--episodes", type=int)
    s.set_defaults(fn=cmd_train_rl)

    s = sub.add_parser("evaluate", parents=[common], help="greedy agent vs sampling user")
    s.add_argument("--models", required=True)
    s.add_argument("--n", type=int, help="number of dialogs")
    s.set_defaults(fn=cmd_evaluate)

    s = sub.add_parser("simulate", parents=[common], help="dump annotated simulated transcripts")
    s.add_argument("--models", required=True)
    s.add_argument("--n", type=int, default=3)
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("chat", parents=[common], help="talk to the trained agent")
    s.add_argument("--models", required=True)
    s.set_defaults(fn=cmd_chat)

    s = sub.add_parser("ingest-dstc2", parents=[common], help="convert DSTC2 data to the corpus format")
    s.add_argument("--root", required=True, help="directory holding the DSTC2 release")
    s.set_defaults(fn=cmd_ingest_dstc2)
    return p


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        setup_logging()
        return args.fn(args)
    except (UsageError, FileNotFoundError, ValueError) as exc:
        print(f"dialogrl {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
