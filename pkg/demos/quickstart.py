"""A whole pipeline in a few minutes, on a small network.

Generates a synthetic corpus, pre-trains the agent and the user simulator
with teacher forcing, runs 2000 episodes of alternating REINFORCE, then
prints one greedy dialog.  With 270 training dialogs the belief tracker only
gets about half the slots right, so success stays in single digits; the
desk-size run in run_experiment.py is where the numbers mean something.
"""
import numpy as np

from dialogrl.domain import sample_goal
from dialogrl.harness.metrics import evaluate
from dialogrl.harness.pipeline import RunConfig, train_rl, train_sl
from dialogrl.training.config import RLConfig, SLConfig
from dialogrl.training.rollout import RolloutConfig, run_episode

small = dict(emb_dim=16, utt_hidden=16, dialog_hidden=32, mlp_hidden=32, act_emb_dim=8, goal_dim=16,
             value_hidden=32, dropout=0.0)
cfg = RunConfig(net=small, n_corpus=300, seed=0, eval_every=500, eval_n=100,
                sl=SLConfig(epochs=8, lr=3e-3, dropout=0.0, batch_size=8),
                rl=RLConfig(total_episodes=2000))

bundle, sl = train_sl(cfg)
for side, res in sl.items():
    print(side, "held-out", {k: round(v, 3) for k, v in res.metrics.items()})

agent, user = bundle.wrappers(cache=True)
print("after SL:", evaluate(agent, user, bundle.domain, 100, np.random.default_rng(1)).success_rate)

tlog = train_rl(bundle, cfg)
for ep, rep in tlog.curve.points:
    print(f"episode {ep:4d}  success {rep.success_rate:.2f}  reward {rep.avg_reward:+.3f}")

# one greedy dialog, with the agent's view of the goal
agent, user = bundle.wrappers()
rng = np.random.default_rng(3)
goal = sample_goal(bundle.domain.ontology, bundle.domain.kb, rng)
tr = run_episode(agent, user, bundle.domain, goal, RolloutConfig(), rng, agent_mode="greedy")
print("\ngoal:", goal.informables, "wants", sorted(goal.requests))
for row in tr.transcript:
    print("  user :", " ".join(row["user_utt"]))
    print("  agent:", " ".join(row["agent_utt"]), f"  [{row['agent_act']}]")
print("success" if tr.success else "failure", f"after {tr.turns} turns")
