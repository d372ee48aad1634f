"""Per-slot records, windowed metrics, and deterministic CSV emission."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import numpy as np

SUMMARY_COLUMNS = ("slot_window", "policy", "lambda", "J",
                   "avg_utility_per_mu", "avg_payment", "avg_drops",
                   "avg_queue", "seed")


def fmt(x) -> str:
    """Fixed-width numeric formatting so identical runs emit identical bytes."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".10e")


@dataclass
class SlotRecord:
    """Everything observable about one scheduling slot."""

    slot: int
    eve_loc: int
    valuations: list[float]
    winners: list[int]
    payments: list[float]
    payoffs: list[float]
    mu_loc: list[int]
    mu_tasks: list[int]
    mu_queue: list[int]
    mu_channel: list[int]        # assigned channel id, -1 if none
    mu_offload: list[int]
    mu_send: list[int]
    mu_arrived: list[int]
    mu_queue_next: list[int]
    mu_drops: list[int]
    mu_utility: list[float]
    mu_cpu_j: list[float]
    mu_tx_j: list[float]


def slots_header(num_sps: int, num_mus: int) -> list[str]:
    cols = ["slot", "eve_loc"]
    for i in range(num_sps):
        cols += [f"sp{i}_valuation", f"sp{i}_winner", f"sp{i}_payment", f"sp{i}_payoff"]
    for n in range(num_mus):
        cols += [f"mu{n}_loc", f"mu{n}_tasks", f"mu{n}_queue", f"mu{n}_channel",
                 f"mu{n}_offload", f"mu{n}_send", f"mu{n}_arrived",
                 f"mu{n}_queue_next", f"mu{n}_drops", f"mu{n}_utility",
                 f"mu{n}_cpu_j", f"mu{n}_tx_j"]
    return cols


def slot_row(rec: SlotRecord) -> list[str]:
    row = [fmt(rec.slot), fmt(rec.eve_loc)]
    for i in range(len(rec.valuations)):
        row += [fmt(rec.valuations[i]), fmt(rec.winners[i]),
                fmt(rec.payments[i]), fmt(rec.payoffs[i])]
    for n in range(len(rec.mu_loc)):
        row += [fmt(rec.mu_loc[n]), fmt(rec.mu_tasks[n]), fmt(rec.mu_queue[n]),
                fmt(rec.mu_channel[n]), fmt(rec.mu_offload[n]), fmt(rec.mu_send[n]),
                fmt(rec.mu_arrived[n]), fmt(rec.mu_queue_next[n]), fmt(rec.mu_drops[n]),
                fmt(rec.mu_utility[n]), fmt(rec.mu_cpu_j[n]), fmt(rec.mu_tx_j[n])]
    return row


class SlotWriter:
    """Streams slot records to CSV without holding the whole run in memory."""

    def __init__(self, path: str | Path, num_sps: int, num_mus: int):
        self.path = Path(path)
        self._fh: IO[str] = open(self.path, "w", newline="\n")
        self._fh.write(",".join(slots_header(num_sps, num_mus)) + "\n")

    def write(self, rec: SlotRecord) -> None:
        self._fh.write(",".join(slot_row(rec)) + "\n")

    def close(self) -> None:
        self._fh.close()


@dataclass
class SummaryRow:
    slot_window: int          # last slot covered by the window
    policy: str
    arrival_rate: float
    num_channels: int
    avg_utility_per_mu: float
    avg_payment: float
    avg_drops: float
    avg_queue: float
    seed: int

    def csv(self) -> list[str]:
        return [fmt(self.slot_window), self.policy, fmt(self.arrival_rate),
                fmt(self.num_channels), fmt(self.avg_utility_per_mu),
                fmt(self.avg_payment), fmt(self.avg_drops), fmt(self.avg_queue),
                fmt(self.seed)]


@dataclass
class SummaryAccumulator:
    """Trailing-window means of utility, payments, drops, and queue length."""

    window: int
    policy: str
    arrival_rate: float
    num_channels: int
    seed: int
    rows: list[SummaryRow] = field(default_factory=list)
    _slots: int = 0
    _utility: float = 0.0
    _payment: float = 0.0
    _drops: float = 0.0
    _queue: float = 0.0

    def add(self, rec: SlotRecord) -> None:
        num_mus = len(rec.mu_loc)
        num_sps = len(rec.payments)
        self._slots += 1
        self._utility += sum(rec.mu_utility) / num_mus
        self._payment += sum(rec.payments) / num_sps
        self._drops += sum(rec.mu_drops) / num_mus
        self._queue += sum(rec.mu_queue) / num_mus
        if self._slots == self.window:
            self.rows.append(SummaryRow(
                rec.slot, self.policy, self.arrival_rate, self.num_channels,
                self._utility / self.window, self._payment / self.window,
                self._drops / self.window, self._queue / self.window, self.seed))
            self._slots = 0
            self._utility = self._payment = self._drops = self._queue = 0.0


def write_summary_csv(path: str | Path, rows: list[SummaryRow]) -> None:
    with open(Path(path), "w", newline="\n") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(row.csv()) + "\n")


def read_summary_csv(path: str | Path) -> list[SummaryRow]:
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    if tuple(header) != SUMMARY_COLUMNS:
        raise ValueError(f"unexpected summary columns: {header}")
    out = []
    for line in lines[1:]:
        parts = line.split(",")
        out.append(SummaryRow(int(parts[0]), parts[1], float(parts[2]),
                              int(float(parts[3])), float(parts[4]), float(parts[5]),
                              float(parts[6]), float(parts[7]), int(parts[8])))
    return out
