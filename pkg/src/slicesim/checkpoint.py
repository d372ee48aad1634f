"""Versioned checkpoints for user nets (with replay) and provider learners.

Reloading a checkpoint and replaying the same RNG streams reproduces the
original trajectories bit for bit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .mu_learner import MuAgent
from .sp_agent import SpLearner

FORMAT_VERSION = 1


def _agent_arrays(agent: MuAgent, prefix: str) -> dict:
    out = {f"{prefix}net/{k}": v for k, v in agent.net.state_dict().items()}
    r = agent.replay
    out[f"{prefix}replay/states"] = r.states
    out[f"{prefix}replay/action_idx"] = r.action_idx
    out[f"{prefix}replay/utilities"] = r.utilities
    out[f"{prefix}replay/next_states"] = r.next_states
    out[f"{prefix}replay/cur_masks"] = r.cur_masks
    out[f"{prefix}replay/next_masks"] = r.next_masks
    out[f"{prefix}replay/meta"] = np.array([r.size, r.pos])
    return out


def _load_agent_arrays(agent: MuAgent, prefix: str, data) -> None:
    agent.net.load_state({k[len(prefix) + 4:]: data[k] for k in data.files
                          if k.startswith(f"{prefix}net/")})
    r = agent.replay
    r.states = np.array(data[f"{prefix}replay/states"])
    r.action_idx = np.array(data[f"{prefix}replay/action_idx"])
    r.utilities = np.array(data[f"{prefix}replay/utilities"])
    r.next_states = np.array(data[f"{prefix}replay/next_states"])
    r.cur_masks = np.array(data[f"{prefix}replay/cur_masks"])
    r.next_masks = np.array(data[f"{prefix}replay/next_masks"])
    r.size, r.pos = (int(x) for x in data[f"{prefix}replay/meta"])


def save_checkpoint(path: str | Path, agents: list[MuAgent | None],
                    learners: dict[int, SpLearner]) -> Path:
    arrays: dict = {"format_version": np.array([FORMAT_VERSION]),
                    "num_agents": np.array([len(agents)]),
                    "learner_ids": np.array(sorted(learners), dtype=np.int64)}
    for n, agent in enumerate(agents):
        if agent is not None:
            arrays.update(_agent_arrays(agent, f"mu{n}/"))
    for i, learner in learners.items():
        arrays.update({f"sp{i}/{k}": v for k, v in learner.state_dict().items()})
    path = Path(path)
    np.savez_compressed(path, **arrays)
    return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")


def load_checkpoint(path: str | Path, agents: list[MuAgent | None],
                    learners: dict[int, SpLearner]) -> None:
    """Restore states in place; layer shapes and learner ids must match."""
    with np.load(Path(path)) as data:
        version = int(data["format_version"][0])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        if int(data["num_agents"][0]) != len(agents):
            raise ValueError("agent count mismatch")
        if list(data["learner_ids"]) != sorted(learners):
            raise ValueError("learner set mismatch")
        for n, agent in enumerate(agents):
            if agent is not None:
                _load_agent_arrays(agent, f"mu{n}/", data)
        for i, learner in learners.items():
            learner.load_state({k: data[f"sp{i}/{k}"] for k in
                                ("counts", "values", "state", "updates",
                                 "running_max", "frozen_cap")})
