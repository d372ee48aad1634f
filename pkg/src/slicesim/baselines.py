"""Comparison policies: channel-aware, queue-aware, and random control.

Each baseline decides per user whether a channel is wanted and gives its
provider a bid valuation; after the auction a served user offloads a random
feasible number of tasks and schedules as many packets as the secrecy-rate
energy budget allows.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .auction import Bid
from .config import SimConfig
from .env import Action, MuState, tx_energy
from .topology import TopologyGraph


class BaselineKind(Enum):
    CHANNEL_AWARE = "channel_aware"
    QUEUE_AWARE = "queue_aware"
    RANDOM = "random"


def baseline_bid(kind: BaselineKind, states: list[MuState], h_ups, h_eves,
                 config: SimConfig, topology: TopologyGraph,
                 rng: np.random.Generator) -> tuple[Bid, list[int]]:
    """Bid and per-user channel flags for one provider under a baseline policy.

    Channel-aware wants a channel wherever the uplink gain beats the
    eavesdropper gain and bids the summed (dimensionless) gain advantage;
    queue-aware wants one when the queue reaches its threshold and bids the
    summed queue lengths of those users; random flips fair coins and draws a
    uniform valuation.
    """
    n = len(states)
    if kind is BaselineKind.CHANNEL_AWARE:
        wants = [1 if h_ups[i] > h_eves[i] else 0 for i in range(n)]
        valuation = sum(max(h_ups[i] - h_eves[i], 0.0) for i in range(n)) / config.h0
    elif kind is BaselineKind.QUEUE_AWARE:
        wants = [1 if states[i].queue >= config.queue_threshold else 0 for i in range(n)]
        valuation = float(sum(states[i].queue * wants[i] for i in range(n)))
    elif kind is BaselineKind.RANDOM:
        wants = [int(rng.integers(0, 2)) for _ in range(n)]
        valuation = float(rng.uniform(0.0, config.random_bid_cap))
    else:
        raise ValueError(f"unknown baseline {kind}")
    demand = [0] * topology.num_bs
    for state, z in zip(states, wants):
        if z:
            demand[topology.serving_bs(state.loc)] += 1
    return Bid(valuation, tuple(demand)), wants


def baseline_act(state: MuState, realized_channel: int, h_up: float, h_eve: float,
                 config: SimConfig, rng: np.random.Generator) -> Action:
    """Random feasible offload count, then the largest feasible packet batch.

    The sampled offload count is clipped down until the tasks alone fit the
    energy budget (possibly to zero when there is no secrecy capacity), and
    packets fill whatever budget remains.
    """
    if realized_channel == 0:
        return Action(0, 0, 0)
    offload = int(rng.integers(0, state.tasks + 1))
    while offload > 0 and tx_energy(Action(1, offload, 0), h_up, h_eve, config) is None:
        offload -= 1
    send = state.queue
    while send > 0 and tx_energy(Action(1, offload, send), h_up, h_eve, config) is None:
        send -= 1
    return Action(1, offload, send)
