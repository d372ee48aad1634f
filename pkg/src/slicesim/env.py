"""Per-slot stochastic dynamics and the user/provider objective.

A mobile user's local state is (own location, eavesdropper location, task
arrivals, queue length). Each slot it may hold one channel (decided by the
auction), offload some computation tasks and schedule some packets over it at
a secrecy rate against the eavesdropper, and processes the remaining tasks
locally. Infeasible transmissions (no secrecy capacity, or energy above the
power cap) are signalled with None and must be masked, never executed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import SimConfig
from .topology import Grid


@dataclass(frozen=True)
class MuState:
    """Observable per-user state at the start of a slot."""

    loc: int        # user location
    eve_loc: int    # eavesdropper location (broadcast to everyone)
    tasks: int      # computation-task arrivals this slot
    queue: int      # packets buffered

    def validate(self, config: SimConfig) -> None:
        if not 0 <= self.tasks <= config.task_cap:
            raise ValueError("task count out of range")
        if not 0 <= self.queue <= config.queue_cap:
            raise ValueError("queue length out of range")
        if not (0 <= self.loc < config.num_locations
                and 0 <= self.eve_loc < config.num_locations):
            raise ValueError("invalid location")


@dataclass(frozen=True)
class Action:
    """One slot's decision: hold the channel or not, tasks offloaded, packets sent."""

    channel: int    # 0/1, fixed by the auction outcome
    offload: int
    send: int

    def effective(self) -> "Action":
        """Without a channel nothing is transmitted; normalize to the no-op."""
        if self.channel == 0:
            return Action(0, 0, 0)
        return self


NOOP = Action(0, 0, 0)


class MobilityKernel:
    """Row-stochastic location transition matrix, supported on self + 4-neighbours."""

    def __init__(self, matrix: np.ndarray, grid: Grid):
        matrix = np.asarray(matrix, dtype=float)
        L = grid.num_locations
        if matrix.shape != (L, L):
            raise ValueError("kernel shape must be (L, L)")
        sums = matrix.sum(axis=1)
        if not np.allclose(sums, 1.0, rtol=0.0, atol=1e-9):
            raise ValueError("kernel rows must sum to 1")
        if (matrix < 0).any():
            raise ValueError("kernel entries must be non-negative")
        for loc in range(L):
            support = set(np.flatnonzero(matrix[loc] > 0.0))
            allowed = {loc, *grid.neighbors4(loc)}
            if not support <= allowed:
                raise ValueError(f"kernel row {loc} leaves the 4-neighbourhood")
        self.matrix = matrix
        self._cum = np.cumsum(matrix, axis=1)
        self._cum[:, -1] = 1.0

    @classmethod
    def lazy_walk(cls, grid: Grid, stay_prob: float = 0.6) -> "MobilityKernel":
        """Stay with probability stay_prob, else move uniformly to an in-grid neighbour."""
        if not 0.0 <= stay_prob <= 1.0:
            raise ValueError("stay_prob must lie in [0, 1]")
        L = grid.num_locations
        m = np.zeros((L, L))
        for loc in range(L):
            nbrs = grid.neighbors4(loc)
            if nbrs:
                m[loc, loc] = stay_prob
                for n in nbrs:
                    m[loc, n] = (1.0 - stay_prob) / len(nbrs)
            else:
                m[loc, loc] = 1.0
        return cls(m, grid)

    @classmethod
    def identity(cls, grid: Grid) -> "MobilityKernel":
        return cls(np.eye(grid.num_locations), grid)

    def sample(self, loc: int, rng: np.random.Generator) -> int:
        return int(np.searchsorted(self._cum[loc], rng.random(), side="right"))


class TaskKernel:
    """Row-stochastic chain over task-arrival counts {0..task_cap}."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("task kernel must be square")
        if not np.allclose(matrix.sum(axis=1), 1.0, rtol=0.0, atol=1e-9):
            raise ValueError("task kernel rows must sum to 1")
        if (matrix < 0).any():
            raise ValueError("task kernel entries must be non-negative")
        self.matrix = matrix
        self._cum = np.cumsum(matrix, axis=1)
        self._cum[:, -1] = 1.0

    @classmethod
    def uniform(cls, task_cap: int) -> "TaskKernel":
        n = task_cap + 1
        return cls(np.full((n, n), 1.0 / n))

    @classmethod
    def identity(cls, task_cap: int) -> "TaskKernel":
        return cls(np.eye(task_cap + 1))

    def sample(self, tasks: int, rng: np.random.Generator) -> int:
        return int(np.searchsorted(self._cum[tasks], rng.random(), side="right"))


def step_mobility(loc: int, kernel: MobilityKernel, rng: np.random.Generator) -> int:
    """Next location drawn from the kernel row of the current one."""
    return kernel.sample(loc, rng)


def sample_arrivals(state: MuState, task_kernel: TaskKernel, rate: float,
                    rng: np.random.Generator, cap: int) -> tuple[int, int]:
    """Next slot's (task arrivals, packet arrivals).

    Tasks follow the Markov chain; packets are Poisson with the given mean,
    truncated at cap so the queue dynamics stay bounded.
    """
    tasks = task_kernel.sample(state.tasks, rng)
    packets = int(min(rng.poisson(rate), cap))
    return tasks, packets


def queue_update(queue: int, action: Action, arrived: int, queue_cap: int) -> tuple[int, int]:
    """New queue length and packet drops after serving and arrivals."""
    if action.send > queue:
        raise ValueError("cannot schedule more packets than are queued")
    raw = queue - action.channel * action.send + arrived
    return min(raw, queue_cap), max(raw - queue_cap, 0)


def tx_energy(action: Action, h_up: float, h_eve: float, config: SimConfig) -> float | None:
    """Energy (J) to transmit the action's payload at a secrecy rate, or None.

    None marks an infeasible transmission: the uplink gain does not exceed the
    eavesdropper gain (no secrecy capacity), the payload exceeds what any
    power can carry secretly within the slot, or the energy exceeds the
    transmit-power cap. A zero payload always costs nothing.
    """
    if h_up < 0 or h_eve < 0:
        raise ValueError("gains must be non-negative")
    payload = action.channel * (config.task_bits * action.offload
                                + config.packet_bits * action.send)
    if payload == 0:
        return 0.0
    if h_up <= h_eve:
        return None
    factor = 2.0 ** (payload / config.bits_per_slot)
    denom = h_up - h_eve * factor
    if denom <= 0.0:
        return None
    energy = config.noise_energy_j * (factor - 1.0) / denom
    if energy > config.max_tx_energy_j:
        return None
    return energy


def cpu_energy(tasks: int, action: Action, config: SimConfig) -> float:
    """CPU energy (J) for the tasks processed locally this slot."""
    if action.offload > tasks:
        raise ValueError("cannot offload more tasks than arrived")
    residual = tasks - action.channel * action.offload
    return (config.switched_cap * config.task_bits * config.cycles_per_bit
            * config.cpu_hz ** 2 * residual)


def utility(state: MuState, action: Action, arrived: int, h_up: float, h_eve: float,
            config: SimConfig) -> float | None:
    """Per-user utility: exp(-queue') + exp(-drops) + weight*(exp(-E_cpu) + exp(-E_tx)).

    Returns None when the transmission itself is infeasible.
    """
    e_tx = tx_energy(action, h_up, h_eve, config)
    if e_tx is None:
        return None
    e_cpu = cpu_energy(state.tasks, action, config)
    new_queue, drops = queue_update(state.queue, action, arrived, config.queue_cap)
    return (np.exp(-float(new_queue)) + np.exp(-float(drops))
            + config.energy_weight * (np.exp(-e_cpu) + np.exp(-e_tx)))


def sp_payoff(utilities: Sequence[float], prices: Sequence[float], payment: float) -> float:
    """Provider payoff: priced sum of its users' utilities minus its auction payment."""
    if payment < 0:
        raise ValueError("payment must be non-negative")
    return float(sum(p * u for p, u in zip(prices, utilities, strict=True)) - payment)
