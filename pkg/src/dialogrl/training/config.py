"""Training configurations and their JSON form.

Config files are JSON objects with optional ``"sl"`` and ``"rl"`` sections;
any field left out keeps its default, unknown fields are rejected.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

ALGORITHMS = ("reinforce", "a2c")
RL_MODES = ("joint", "agent-only")


@dataclass(frozen=True)
class SLConfig:
    lr: float = 1e-3
    dropout: float = 0.5
    batch_size: int = 16
    epochs: int = 20
    lam_act: float = 1.0
    lam_slot: float = 1.0
    lam_ptr: float = 1.0
    clip: float = 5.0

    def __post_init__(self):
        lams = (self.lam_act, self.lam_slot, self.lam_ptr)
        if min(lams) < 0 or max(lams) <= 0:
            raise ValueError("loss weights must be >= 0 with at least one positive")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")


@dataclass(frozen=True)
class RLConfig:
    """Policy-gradient settings.

    ``scope`` is ``"full"`` to back-propagate through the whole network or
    ``"head"`` to train only the action head on top of frozen features.
    ``baseline`` enables a moving-average baseline for REINFORCE.
    """

    algorithm: str = "reinforce"
    mode: str = "joint"
    gamma: float = 0.95
    cycle_length: int = 100
    max_turns: int = 20
    beta_succ: float = 1.0
    beta_fail: float = -1.0
    episodes_per_update: int = 1
    total_episodes: int = 20000
    lr: float = 1e-3
    value_lr: float = 1e-3
    value_hidden: int = 64
    baseline: bool = False
    baseline_decay: float = 0.99
    scope: str = "head"
    noise_p: float = 0.1
    w_inf: float = 0.5
    w_req: float = 0.5
    clip: float = 5.0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.mode not in RL_MODES:
            raise ValueError(f"mode must be one of {RL_MODES}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.cycle_length < 1:
            raise ValueError("cycle_length must be >= 1")
        if self.max_turns < 2:
            raise ValueError("max_turns must be >= 2")
        if self.episodes_per_update < 1 or self.total_episodes < 0:
            raise ValueError("episodes_per_update must be >= 1 and total_episodes >= 0")
        if self.scope not in ("full", "head"):
            raise ValueError("scope must be 'full' or 'head'")


def _build(cls, obj: dict):
    known = {f.name for f in fields(cls)}
    unknown = set(obj) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return cls(**obj)


def load_config(path) -> tuple[SLConfig, RLConfig, dict]:
    """Returns (sl, rl, remaining top-level sections)."""
    obj = json.loads(Path(path).read_text())
    if not isinstance(obj, dict):
        raise ValueError("config file must hold a JSON object")
    sl = _build(SLConfig, obj.pop("sl", {}))
    rl = _build(RLConfig, obj.pop("rl", {}))
    return sl, rl, obj


def config_to_json(sl: SLConfig, rl: RLConfig, extra: dict | None = None) -> dict:
    out = dict(extra or {})
    out["sl"] = asdict(sl)
    out["rl"] = asdict(rl)
    return out
