"""Per-provider abstraction: payment intervals, transition counts, payment value.

A provider summarizes everything it cannot observe about its competitors by
the interval its previous auction payment fell into. Interval 1 is reserved
for a zero payment (losing, or winning for free when channels are plentiful);
the remainder of (0, cap] splits into equal-width intervals. A count table
over (interval, interval, won-flag) estimates the abstract transition kernel,
and a learned value per interval prices the expected discounted payments.
Together with its users' reported action values these produce the auction bid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .auction import Bid
from .config import SimConfig
from .topology import TopologyGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AbstractStateSpec:
    """Payment-interval boundaries; states are 1-based, state 1 means "paid nothing"."""

    num_states: int
    max_payment: float
    boundaries: tuple[float, ...]   # boundaries[s-1] is the upper edge of state s

    def __post_init__(self):
        if self.num_states < 2:
            raise ValueError("need at least the zero interval and one more")
        if len(self.boundaries) != self.num_states:
            raise ValueError("one boundary per state")
        if self.boundaries[0] != 0.0:
            raise ValueError("state 1 is the zero-payment interval")
        if self.max_payment > 0 and any(b2 <= b1 for b1, b2 in
                                        zip(self.boundaries[1:], self.boundaries[2:])):
            raise ValueError("boundaries must increase strictly after the zero interval")
        if self.boundaries[-1] != self.max_payment:
            raise ValueError("last boundary must equal the payment cap")

    @classmethod
    def equal_width(cls, num_states: int, max_payment: float) -> "AbstractStateSpec":
        """Zero interval plus num_states-1 equal slices of (0, max_payment]."""
        if max_payment < 0:
            raise ValueError("max_payment must be non-negative")
        step = max_payment / (num_states - 1)
        bounds = tuple(s * step for s in range(num_states))
        return cls(num_states, max_payment, bounds)


def abstract_state(payment: float, spec: AbstractStateSpec) -> int:
    """Interval index in {1..S} of a payment; payments above the cap clamp to S."""
    if payment < 0:
        raise ValueError("payments are non-negative")
    if payment == 0.0:
        return 1
    if payment > spec.max_payment:
        log.debug("payment %.6g above cap %.6g; clamped to top interval",
                  payment, spec.max_payment)
        return spec.num_states
    # boundaries[0]=0 < payment <= boundaries[-1]; find the first edge >= payment
    lo = int(np.searchsorted(np.asarray(spec.boundaries), payment, side="left"))
    return lo + 1


class TransitionTable:
    """Counts of abstract-state transitions, split by the previous winner flag."""

    def __init__(self, num_states: int):
        self.counts = np.zeros((num_states, num_states, 2), dtype=np.int64)

    @property
    def num_states(self) -> int:
        return self.counts.shape[0]

    def record(self, s_prev: int, s_now: int, won_prev: int) -> None:
        self.counts[s_prev - 1, s_now - 1, int(won_prev)] += 1

    def total(self) -> int:
        return int(self.counts.sum())


def record_transition(table: TransitionTable, s_prev: int, s_now: int,
                      won_prev: int) -> None:
    table.record(s_prev, s_now, won_prev)


def estimate_transition(table: TransitionTable, s: int, won: int) -> np.ndarray:
    """Row-normalized next-state distribution; uniform before any observation."""
    row = table.counts[s - 1, :, int(won)]
    total = row.sum()
    if total == 0:
        return np.full(table.num_states, 1.0 / table.num_states)
    return row / total


@dataclass
class PaymentValue:
    """Learned expected discounted payment per abstract state."""

    values: np.ndarray
    step0: float = 0.5
    step_scale: float = 1000.0

    @classmethod
    def zeros(cls, num_states: int, step0: float = 0.5,
              step_scale: float = 1000.0) -> "PaymentValue":
        return cls(np.zeros(num_states), step0, step_scale)

    def step(self, k: int) -> float:
        """Diminishing step size: divergent sum, convergent squared sum."""
        return self.step0 / (1.0 + k / self.step_scale)


def update_payment_value(pv: PaymentValue, s_now: int, won_now: int,
                         payment: float, table: TransitionTable,
                         discount: float, k: int) -> float:
    """Stochastic fixed-point step on the current state's payment value.

    New value mixes the old one with (1-g)*payment + g*E[value at next state],
    the expectation taken under the estimated transition kernel for the
    realized winner flag. Returns the updated entry.
    """
    step = pv.step(k)
    probs = estimate_transition(table, s_now, won_now)
    target = (1.0 - discount) * payment + discount * float(probs @ pv.values)
    pv.values[s_now - 1] = (1.0 - step) * pv.values[s_now - 1] + step * target
    return float(pv.values[s_now - 1])


@dataclass(frozen=True)
class MuReport:
    """What each user tells its provider before the auction."""

    value: float      # best feasible action value
    wants: int        # channel-preference bit
    loc: int
    price: float      # per-utility price this user pays


def build_bid(reports: list[MuReport], s_now: int, table: TransitionTable,
              pv: PaymentValue, discount: float,
              topology: TopologyGraph) -> Bid:
    """Assemble the bid: per-area demand from the preference bits, value-based price.

    The valuation is the discounted worth of the users' values minus the
    expected discounted payment given whether any channel is requested at all;
    negative results clamp to zero (a negative bid is dominated by abstaining).
    """
    demand = [0] * topology.num_bs
    for r in reports:
        if r.wants:
            demand[topology.serving_bs(r.loc)] += 1
    requesting = int(sum(demand) > 0)
    probs = estimate_transition(table, s_now, requesting)
    gross = sum(r.price * r.value for r in reports) / (1.0 - discount)
    expected_payment = discount / (1.0 - discount) * float(probs @ pv.values)
    valuation = gross - expected_payment
    if valuation < 0.0:
        log.debug("valuation %.6g clamped to 0", valuation)
        valuation = 0.0
    return Bid(valuation, tuple(demand))


def abstract_state_value(mu_values, prices, pv: PaymentValue, s: int) -> float:
    """Diagnostic identity: priced sum of user values minus the payment value."""
    return float(sum(p * v for p, v in zip(prices, mu_values, strict=True))
                 - pv.values[s - 1])


@dataclass
class SpLearner:
    """Mutable per-provider learning state driven by the slot loop."""

    config: SimConfig
    table: TransitionTable = field(init=False)
    pv: PaymentValue = field(init=False)
    state: int = field(init=False, default=1)
    updates: int = field(init=False, default=0)
    running_max: float = field(init=False, default=0.0)
    frozen_cap: float | None = field(init=False, default=None)

    def __post_init__(self):
        s = self.config.payment_bins
        self.table = TransitionTable(s)
        self.pv = PaymentValue.zeros(s, self.config.pv_step0, self.config.pv_step_scale)
        if self.config.payment_cap is not None:
            self.frozen_cap = self.config.payment_cap

    @property
    def spec(self) -> AbstractStateSpec:
        cap = self.frozen_cap if self.frozen_cap is not None else self.running_max
        return AbstractStateSpec.equal_width(self.config.payment_bins, cap)

    def bid(self, reports: list[MuReport], topology: TopologyGraph) -> Bid:
        return build_bid(reports, self.state, self.table, self.pv,
                         self.config.discount, topology)

    def observe_auction(self, payment: float, won: int, slot: int) -> None:
        """Fold one auction outcome into the tables and advance the abstract state."""
        if self.frozen_cap is None:
            self.running_max = max(self.running_max, payment)
            if slot >= self.config.payment_cap_warmup:
                self.frozen_cap = self.running_max
        s_next = abstract_state(payment, self.spec)
        self.table.record(self.state, s_next, won)
        update_payment_value(self.pv, self.state, won, payment, self.table,
                             self.config.discount, self.updates)
        self.updates += 1
        self.state = s_next

    def state_dict(self) -> dict:
        return {
            "counts": self.table.counts,
            "values": self.pv.values,
            "state": np.array([self.state]),
            "updates": np.array([self.updates]),
            "running_max": np.array([self.running_max]),
            "frozen_cap": np.array([np.nan if self.frozen_cap is None else self.frozen_cap]),
        }

    def load_state(self, data: dict) -> None:
        self.table.counts = np.array(data["counts"])
        self.pv.values = np.array(data["values"])
        self.state = int(data["state"][0])
        self.updates = int(data["updates"][0])
        self.running_max = float(data["running_max"][0])
        cap = float(data["frozen_cap"][0])
        self.frozen_cap = None if np.isnan(cap) else cap
