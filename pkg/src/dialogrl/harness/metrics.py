"""Evaluation reports and learning curves."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..domain import sample_goal
from ..training.rollout import RolloutConfig, run_episode

CURVE_HEADER = ["episode", "success_rate", "avg_reward", "avg_success_turns"]


@dataclass(frozen=True)
class EvalReport:
    """``avg_success_turns`` is None when no dialog succeeded."""

    success_rate: float
    avg_reward: float
    avg_success_turns: float | None
    n_dialogs: int
    seed: int | None = None

    def to_json(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        turns = "-" if self.avg_success_turns is None else f"{self.avg_success_turns:.2f}"
        rows = [("success rate (%)", f"{100 * self.success_rate:.1f}"),
                ("avg reward", f"{self.avg_reward:.3f}"),
                ("avg success turn size", turns),
                ("dialogs", str(self.n_dialogs)),
                ("seed", "-" if self.seed is None else str(self.seed))]
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{w}}  {v:>10}" for k, v in rows)


def report_from_traces(traces, seed: int | None = None) -> EvalReport:
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one dialog")
    succ = [t.turns for t in traces if t.success]
    return EvalReport(
        success_rate=len(succ) / len(traces),
        avg_reward=float(np.mean([t.total_reward for t in traces])),
        avg_success_turns=float(np.mean(succ)) if succ else None,
        n_dialogs=len(traces),
        seed=seed,
    )


def evaluate(agent, user, domain, n: int, rng: np.random.Generator, cfg: RolloutConfig | None = None,
             seed: int | None = None, goals=None) -> EvalReport:
    """n fresh-goal dialogs with a greedy agent and a sampling user."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cfg = cfg or RolloutConfig()
    traces = []
    for i in range(n):
        goal = goals[i] if goals is not None else sample_goal(domain.ontology, domain.kb, rng)
        traces.append(run_episode(agent, user, domain, goal, cfg, rng, agent_mode="greedy",
                                  user_mode="softmax"))
    return report_from_traces(traces, seed)


@dataclass
class LearningCurve:
    points: list = field(default_factory=list)

    def append(self, episode: int, report: EvalReport) -> None:
        if self.points and episode <= self.points[-1][0]:
            raise ValueError("episode indices must be strictly increasing")
        self.points.append((int(episode), report))

    def __len__(self):
        return len(self.points)

    @property
    def episodes(self) -> list:
        return [e for e, _ in self.points]

    def column(self, name: str) -> list:
        return [getattr(r, name) for _, r in self.points]


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def emit_curve(curve: LearningCurve, path) -> None:
    """Write ``path`` as CSV and a whitespace-separated ``.dat`` twin for gnuplot."""
    if not len(curve):
        raise ValueError("curve is empty")
    eps = curve.episodes
    if any(b <= a for a, b in zip(eps, eps[1:])):
        raise ValueError("episode indices must be strictly increasing")
    path = Path(path)
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CURVE_HEADER)
        for e, r in curve.points:
            w.writerow([e, _fmt(r.success_rate), _fmt(r.avg_reward), _fmt(r.avg_success_turns)])
    lines = ["# " + " ".join(CURVE_HEADER)]
    for e, r in curve.points:
        turns = "NaN" if r.avg_success_turns is None else repr(float(r.avg_success_turns))
        lines.append(f"{e} {r.success_rate!r} {r.avg_reward!r} {turns}")
    path.with_suffix(".dat").write_text("\n".join(lines) + "\n")


def read_curve(path) -> LearningCurve:
    curve = LearningCurve()
    with Path(path).open(newline="") as f:
        rows = csv.reader(f)
        if next(rows) != CURVE_HEADER:
            raise ValueError(f"{path}: unexpected header")
        for row in rows:
            turns = float(row[3]) if row[3] else None
            if turns is not None and math.isnan(turns):
                turns = None
            curve.append(int(row[0]), EvalReport(float(row[1]), float(row[2]), turns, 0))
    return curve
