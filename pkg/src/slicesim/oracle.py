"""Independent brute-force references for the auction.

Deliberately kept separate from the production solver: feasibility here comes
either from a closed form specific to the 4-cycle BS graph (channels can only
be shared by the two diagonal BS pairs, so the minimum channel count is the
maximum demand sum over an adjacent pair) or from raw enumeration over all
per-channel independent-set choices. Welfare comes from plain subset
enumeration over these primitives.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .auction import Bid, combined_demand


def is_four_cycle(adjacency: np.ndarray) -> bool:
    if adjacency.shape != (4, 4):
        return False
    degrees = adjacency.sum(axis=1)
    return bool((degrees == 2).all()) and adjacency.any()


def four_cycle_min_channels(demands, adjacency: np.ndarray) -> int:
    """Closed form on the 4-cycle: max demand sum over an adjacent BS pair."""
    if not is_four_cycle(adjacency):
        raise ValueError("closed form only holds on a 4-cycle")
    d = [int(x) for x in demands]
    return max(d[a] + d[b] for a in range(4) for b in range(a + 1, 4)
               if adjacency[a, b])


def four_cycle_feasible(demands, num_channels: int, adjacency: np.ndarray) -> bool:
    return four_cycle_min_channels(demands, adjacency) <= num_channels


def enumerate_feasible(demands, num_channels: int, adjacency: np.ndarray) -> bool:
    """Raw enumeration: every channel tries every independent set (tiny J only)."""
    d = tuple(int(x) for x in demands)
    if sum(d) == 0:
        return True
    B = adjacency.shape[0]
    sets: list[tuple[int, ...]] = [()]
    for r in range(1, B + 1):
        for combo in combinations(range(B), r):
            if all(not adjacency[a, b] for a, b in combinations(combo, 2)):
                sets.append(combo)

    def recurse(resid, left):
        if all(r <= 0 for r in resid):
            return True
        if left == 0:
            return False
        for s in sets:
            nxt = list(resid)
            for b in s:
                nxt[b] -= 1
            if recurse(tuple(nxt), left - 1):
                return True
        return False

    return recurse(d, num_channels)


def brute_force_welfare(bids: list[Bid], num_channels: int,
                        adjacency: np.ndarray) -> float:
    """Max welfare over all provider subsets, with closed-form feasibility."""
    best = 0.0
    for mask in range(2 ** len(bids)):
        subset = [i for i in range(len(bids)) if mask >> i & 1]
        demand = combined_demand(bids, subset) if bids else ()
        if bids and not four_cycle_feasible(demand, num_channels, adjacency):
            continue
        best = max(best, sum(bids[i].valuation for i in subset))
    return best


@dataclass
class OracleReport:
    instances: int
    mismatches: int
    first_failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


def random_instance(rng: np.random.Generator, adjacency: np.ndarray,
                    max_sps: int = 3, max_channels: int = 5,
                    max_demand: int = 3, max_valuation: int = 10
                    ) -> tuple[list[Bid], int]:
    """Random small instance on a given graph, integer valuations in {0..max}."""
    num_sps = int(rng.integers(1, max_sps + 1))
    num_channels = int(rng.integers(1, max_channels + 1))
    B = adjacency.shape[0]
    bids = []
    for _ in range(num_sps):
        demand = tuple(int(x) for x in rng.integers(0, max_demand + 1, size=B))
        valuation = float(rng.integers(0, max_valuation + 1))
        bids.append(Bid(valuation, demand))
    return bids, num_channels


def oracle_check(num_instances: int, seed: int, adjacency: np.ndarray,
                 progress_every: int = 0) -> OracleReport:
    """Compare the production auction against brute force on random instances.

    Checks exact welfare equality, every allocation invariant, and the VCG
    payment bounds (non-negative; at most the winner's valuation).
    """
    from .auction import AuctionSolver, MuRequest, check_outcome

    rng = np.random.Generator(np.random.PCG64(seed))
    report = OracleReport(instances=num_instances, mismatches=0)
    for n in range(num_instances):
        bids, num_channels = random_instance(rng, adjacency)
        solver = AuctionSolver(adjacency, num_channels)
        requests = []
        mu = 0
        for sp, bid in enumerate(bids):
            for b, count in enumerate(bid.demand):
                for _ in range(count):
                    requests.append(MuRequest(mu=mu, sp=sp, bs=b, wants=True))
                    mu += 1
        outcome = solver.run(bids, requests)
        welfare = sum(b.valuation for b, w in zip(bids, outcome.winners) if w)
        expected = brute_force_welfare(bids, num_channels, adjacency)
        problems = []
        if welfare != expected:
            problems.append(f"welfare {welfare} != brute force {expected}")
        try:
            check_outcome(outcome, bids, requests, adjacency, num_channels)
        except AssertionError as exc:
            problems.append(str(exc))
        for i, bid in enumerate(bids):
            if outcome.winners[i] and outcome.payments[i] > bid.valuation + 1e-9:
                problems.append(f"payment {outcome.payments[i]} above valuation")
        if problems:
            report.mismatches += 1
            if report.first_failure is None:
                from .auction import dump_instance
                report.first_failure = ("; ".join(problems) + "\n"
                                        + dump_instance(bids, num_channels, adjacency))
    return report
