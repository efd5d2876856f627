"""Text REPL: a person types user utterances, the trained agent answers."""
from __future__ import annotations

import json
import sys

import numpy as np

from ..language import tokenize
from ..protocol import AgentObservation
from ..training.rollout import AgentWorld

QUIT = "/quit"


def chat_repl(agent, domain, inp=None, out=None, rng: np.random.Generator | None = None,
              transcript_path=None, max_turns: int | None = None) -> list:
    """Alternate human text and agent responses until ``/quit`` or end of input.

    Words the agent has never seen map to the unknown token.  Returns the
    transcript (one dict per turn) and, when ``transcript_path`` is given,
    also writes it there as JSON lines.
    """
    inp = inp or sys.stdin
    out = out or sys.stdout
    rng = rng or np.random.default_rng(0)
    session = agent.start()
    world = AgentWorld(domain)
    agent_utt: list = []
    transcript = []
    k = 0
    while max_turns is None or k < max_turns:
        out.write("you> ")
        out.flush()
        line = inp.readline()
        if not line or line.strip() == QUIT:
            break
        k += 1
        user_utt = tokenize(line)
        unknown = [t for t in user_utt if t not in agent.vocab]
        flag = world.kb_flag
        obs = AgentObservation(k, agent_utt, user_utt, flag, None, {}, len(world.results))
        ad = session.act(obs, None, "greedy", rng)
        res = world.apply(ad, rng)
        out.write("agent> " + " ".join(res["utt"]) + "\n")
        transcript.append({
            "turn": k, "user_utt": user_utt, "unknown_tokens": unknown, "agent_act": ad.act,
            "agent_utt": res["utt"], "belief": dict(ad.belief), "pointer": res["pointer"],
            "entity": world.entity.name if world.entity is not None else None,
            "kb_flag": flag, "api_call": res["api_call"],
        })
        agent_utt = res["utt"]
    if transcript_path is not None:
        with open(transcript_path, "w") as fh:
            for row in transcript:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    return transcript
