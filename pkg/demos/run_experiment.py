"""SL versus agent-only and joint RL, for REINFORCE and A2C.

This is the run behind acceptance criteria 5 and 6: three seeds, desk-size
networks, 20k RL episodes per arm.  Results are cached per (seed, arm) so it
can be interrupted and resumed; the acceptance suite reads the same cache.

    python3 demos/run_experiment.py [cache_dir]
"""
import logging
import os
import sys
from pathlib import Path

import numpy as np

from dialogrl.harness.experiment import ExperimentConfig, format_table, quarter_turns, run_experiment, summarize

logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
root = Path(__file__).resolve().parents[1]
cache = Path(sys.argv[1] if len(sys.argv) > 1 else
             os.environ.get("DIALOGRL_EXPERIMENT_CACHE", root / "experiments" / "cache"))

cfg = ExperimentConfig()
results = run_experiment(cfg, cache)
table = format_table(summarize(results))

pairs = [quarter_turns(r) for r in results["reinforce-joint"]]
trend = ("reinforce-joint success turns, first vs last quarter of training: "
         f"{np.mean([p[0] for p in pairs]):.2f} -> {np.mean([p[1] for p in pairs]):.2f}")
per_seed = "\n".join(f"{name:<22} " + "  ".join(f"{100 * r['final']['success_rate']:5.1f}" for r in runs)
                     for name, runs in results.items())
print(table, per_seed, trend, sep="\n\n")

(root / "experiments").mkdir(exist_ok=True)
(root / "experiments" / "results.md").write_text(f"""# Synthetic-domain comparison

Seeds {list(cfg.seeds)}, net preset `{cfg.net}`, {cfg.n_corpus} corpus dialogs, {cfg.episodes} RL episodes per arm,
final evaluation on {cfg.final_eval_n} dialogs (greedy agent, sampling user).

Seed means:

```
{table}
```

Success % per seed:

```
{per_seed}
```

{trend}
""")
