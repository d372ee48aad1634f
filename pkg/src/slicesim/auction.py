"""Per-slot channel auction: winner determination under interference constraints
and VCG payments.

A bid is (valuation, per-BS channel demand). An allocation must satisfy, per
channel: the BSs using it form an independent set of the BS neighbourhood
graph; at most one user per (BS, channel); at most one channel per user. The
orchestrator picks the welfare-maximizing set of winning providers (all-or-
nothing per provider), charges each winner the externality it imposes on the
others, and hands each requesting user of a winner exactly one channel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bid:
    """Valuation plus the number of channels requested in each BS area."""

    valuation: float
    demand: tuple[int, ...]

    def __post_init__(self):
        if self.valuation < 0:
            raise ValueError("valuation must be non-negative (clamp before bidding)")
        if any(d < 0 for d in self.demand):
            raise ValueError("demands must be non-negative")

    @property
    def total_demand(self) -> int:
        return sum(self.demand)


@dataclass(frozen=True)
class MuRequest:
    """One user's channel request: identity, provider, BS area, and its flag."""

    mu: int
    sp: int
    bs: int
    wants: bool


@dataclass
class AuctionOutcome:
    winners: np.ndarray            # bool per SP
    assignment: dict[int, int]     # user -> channel id
    payments: np.ndarray           # float per SP
    witness: list[frozenset[int]]  # per-channel BS sets actually used


def independent_sets(adjacency: np.ndarray) -> list[frozenset[int]]:
    """All non-empty independent sets of the BS graph (B is small)."""
    B = adjacency.shape[0]
    sets: list[frozenset[int]] = []
    for r in range(1, B + 1):
        for combo in combinations(range(B), r):
            if all(not adjacency[a, b] for a, b in combinations(combo, 2)):
                sets.append(frozenset(combo))
    return sets


def _max_set_size(adjacency: np.ndarray) -> int:
    return max((len(s) for s in independent_sets(adjacency)), default=0)


def feasible(demands, num_channels: int, adjacency: np.ndarray
             ) -> tuple[bool, list[frozenset[int]] | None]:
    """Can the per-BS demands be packed into the channels without interference?

    Depth-first packing over per-channel independent sets, restricted to
    maximal sets of the still-demanding BSs (serving more never hurts) and
    memoized on (residual demand, channels left). On success also returns a
    per-channel witness trimmed to the exact demands.
    """
    d = tuple(int(x) for x in demands)
    if any(x < 0 for x in d):
        raise ValueError("demands must be non-negative")
    if num_channels < 0:
        raise ValueError("channel count must be non-negative")
    if sum(d) == 0:
        return True, []
    all_sets = independent_sets(adjacency)
    max_size = max((len(s) for s in all_sets), default=0)
    if max_size == 0:
        return False, None
    failed: set[tuple[tuple[int, ...], int]] = set()

    def search(resid: tuple[int, ...], left: int) -> list[frozenset[int]] | None:
        total = sum(resid)
        if total == 0:
            return []
        # each channel serves a BS at most once, and at most max_size BSs
        if max(resid) > left or total > left * max_size:
            return None
        key = (resid, left)
        if key in failed:
            return None
        positive = frozenset(b for b, r in enumerate(resid) if r > 0)
        inside = [s for s in all_sets if s <= positive]
        candidates = [s for s in inside if not any(s < t for t in inside)]
        candidates.sort(key=lambda s: (-len(s), sorted(s)))
        for s in candidates:
            nxt = tuple(max(r - 1, 0) if b in s else r for b, r in enumerate(resid))
            rest = search(nxt, left - 1)
            if rest is not None:
                return [s] + rest
        failed.add(key)
        return None

    packing = search(d, num_channels)
    if packing is None:
        return False, None
    # trim over-serving (maximal sets may cover BSs whose demand is already met)
    served = [0] * len(d)
    witness = []
    for s in packing:
        keep = set()
        for b in sorted(s):
            if served[b] < d[b]:
                served[b] += 1
                keep.add(b)
        witness.append(frozenset(keep))
    assert served == list(d), "packing does not cover the demands"
    return True, witness


def min_channels(demands, adjacency: np.ndarray, limit: int) -> int | None:
    """Fewest channels that can carry the demands, or None if above the limit."""
    d = tuple(int(x) for x in demands)
    if sum(d) == 0:
        return 0
    lo = max(d)
    for j in range(lo, limit + 1):
        ok, _ = feasible(d, j, adjacency)
        if ok:
            return j
    return None


def combined_demand(bids: list[Bid], subset) -> tuple[int, ...]:
    B = len(bids[0].demand)
    total = [0] * B
    for i in subset:
        for b, c in enumerate(bids[i].demand):
            total[b] += c
    return tuple(total)


def _best_subset(bids: list[Bid], min_channels_fn) -> tuple[np.ndarray, tuple[int, ...]]:
    """Exhaustive welfare maximization over provider subsets.

    min_channels_fn(demand) returns the fewest channels that carry the demand,
    or None when infeasible. Ties break first toward fewer channels used, then
    toward the lexicographically smallest winner index set, so outcomes are
    reproducible.
    """
    if not bids:
        raise ValueError("need at least one bid")
    I = len(bids)
    best_key = None
    best_subset: tuple[int, ...] = ()
    for mask in range(2 ** I):
        subset = tuple(i for i in range(I) if mask >> i & 1)
        demand = combined_demand(bids, subset)
        used = min_channels_fn(demand)
        if used is None:
            continue
        welfare = sum(bids[i].valuation for i in subset)
        key = (-welfare, used, subset)
        if best_key is None or key < best_key:
            best_key = key
            best_subset = subset
    winners = np.zeros(I, dtype=bool)
    winners[list(best_subset)] = True
    return winners, combined_demand(bids, best_subset)


def winner_determination(bids: list[Bid], num_channels: int,
                         adjacency: np.ndarray) -> np.ndarray:
    """Welfare-maximizing winner flags (all-or-nothing per provider)."""
    if not bids:
        raise ValueError("need at least one bid")
    winners, _ = _best_subset(bids, lambda d: min_channels(d, adjacency, num_channels))
    return winners


def _externality(bids: list[Bid], winners: np.ndarray, sp: int, solve_fn) -> float:
    """Payment of one winner: the welfare the others lose because it is present."""
    if not winners[sp]:
        return 0.0
    others = [b for i, b in enumerate(bids) if i != sp]
    if not others:
        return 0.0
    counterfactual = solve_fn(others)
    welfare_without = sum(b.valuation for b, w in zip(others, counterfactual) if w)
    welfare_now = sum(b.valuation for i, (b, w) in enumerate(zip(bids, winners))
                      if w and i != sp)
    # mathematically >= 0; the floor only absorbs float noise
    return max(float(welfare_without - welfare_now), 0.0)


def vcg_payment(bids: list[Bid], winners: np.ndarray, num_channels: int,
                adjacency: np.ndarray, sp: int) -> float:
    """Externality price for one provider; losers pay nothing."""
    return _externality(bids, winners, sp,
                        lambda bs: winner_determination(bs, num_channels, adjacency))


def vcg_payments(bids: list[Bid], winners: np.ndarray, num_channels: int,
                 adjacency: np.ndarray) -> np.ndarray:
    return np.array([vcg_payment(bids, winners, num_channels, adjacency, i)
                     for i in range(len(bids))])


def allocate_channels(winners: np.ndarray, bids: list[Bid],
                      requests: list[MuRequest],
                      witness: list[frozenset[int]]) -> dict[int, int]:
    """Concrete user -> channel map realizing the witness.

    Every requesting user of a winning provider gets exactly one channel in
    its BS area; channel ids are the witness positions. Raises if the witness
    capacity does not match the winners' demands (internal inconsistency).
    """
    B = len(bids[0].demand) if bids else 0
    demand = combined_demand(bids, [i for i in range(len(bids)) if winners[i]])
    capacity = [sum(1 for s in witness if b in s) for b in range(B)]
    if list(demand) != capacity:
        raise RuntimeError(f"witness capacity {capacity} != winner demand {list(demand)}")

    by_area: dict[int, list[int]] = {b: [j for j, s in enumerate(witness) if b in s]
                                     for b in range(B)}
    assignment: dict[int, int] = {}
    for b in range(B):
        queue = list(by_area[b])
        for sp in range(len(bids)):
            if not winners[sp]:
                continue
            wanting = sorted(r.mu for r in requests
                             if r.sp == sp and r.bs == b and r.wants)
            if len(wanting) != bids[sp].demand[b]:
                raise RuntimeError("requests inconsistent with the submitted demand")
            for mu in wanting:
                assignment[mu] = queue.pop(0)
    return assignment


def check_outcome(outcome: AuctionOutcome, bids: list[Bid],
                  requests: list[MuRequest], adjacency: np.ndarray,
                  num_channels: int) -> None:
    """Raise AssertionError unless the outcome satisfies every auction invariant."""
    area_of = {r.mu: r.bs for r in requests}
    sp_of = {r.mu: r.sp for r in requests}
    used: dict[int, set[int]] = {}
    per_bs_channel: set[tuple[int, int]] = set()
    for mu, ch in outcome.assignment.items():
        assert 0 <= ch < num_channels, "channel id out of range"
        b = area_of[mu]
        assert (b, ch) not in per_bs_channel, "two users share a (BS, channel)"
        per_bs_channel.add((b, ch))
        used.setdefault(ch, set()).add(b)
        assert outcome.winners[sp_of[mu]], "user of a losing provider got a channel"
    for ch, bs_set in used.items():
        for a, b in combinations(sorted(bs_set), 2):
            assert not adjacency[a, b], "channel reused at adjacent BSs"
    # winner demand is served exactly; losers get nothing
    for sp, bid in enumerate(bids):
        for b in range(len(bid.demand)):
            served = sum(1 for mu, ch in outcome.assignment.items()
                         if sp_of[mu] == sp and area_of[mu] == b)
            expected = bid.demand[b] if outcome.winners[sp] else 0
            assert served == expected, "served channels != winner demand"
        assert outcome.payments[sp] >= 0, "negative payment"
        if not outcome.winners[sp]:
            assert outcome.payments[sp] == 0, "loser charged a payment"


class AuctionSolver:
    """Winner determination + payments + allocation with a feasibility cache.

    The cache is keyed on (aggregate demand, channel count); it only memoizes
    the pure feasibility question so repeated slots stay cheap.
    """

    def __init__(self, adjacency: np.ndarray, num_channels: int):
        self.adjacency = adjacency
        self.num_channels = num_channels
        self._feas: dict[tuple[tuple[int, ...], int], tuple[bool, list[frozenset[int]] | None]] = {}
        self._minch: dict[tuple[int, ...], int | None] = {}

    def _feasible(self, demand: tuple[int, ...], j: int):
        key = (demand, j)
        out = self._feas.get(key)
        if out is None:
            out = feasible(demand, j, self.adjacency)
            self._feas[key] = out
        return out

    def _min_channels(self, demand: tuple[int, ...]) -> int | None:
        out = self._minch.get(demand)
        if out is None and demand not in self._minch:
            if sum(demand) == 0:
                out = 0
            else:
                out = None
                for j in range(max(demand), self.num_channels + 1):
                    if self._feasible(demand, j)[0]:
                        out = j
                        break
            self._minch[demand] = out
        return out

    def _solve(self, bids: list[Bid]) -> tuple[np.ndarray, tuple[int, ...]]:
        return _best_subset(bids, self._min_channels)

    def run(self, bids: list[Bid], requests: list[MuRequest]) -> AuctionOutcome:
        winners, demand = self._solve(bids)
        payments = np.array([_externality(bids, winners, i,
                                          lambda bs: self._solve(bs)[0])
                             for i in range(len(bids))])
        ok, witness = self._feasible(demand, self.num_channels)
        assert ok and witness is not None, "winner set must be feasible"
        assignment = allocate_channels(winners, bids, requests, witness)
        return AuctionOutcome(winners, assignment, payments, witness)


# Text instance format: for regression corpora and oracle harnesses ---------

def dump_instance(bids: list[Bid], num_channels: int, adjacency: np.ndarray) -> str:
    B = adjacency.shape[0]
    lines = [f"channels {num_channels}", f"bs {B}"]
    for a, b in combinations(range(B), 2):
        if adjacency[a, b]:
            lines.append(f"edge {a} {b}")
    for i, bid in enumerate(bids):
        demand = " ".join(str(c) for c in bid.demand)
        lines.append(f"bid {i} {bid.valuation!r} {demand}")
    return "\n".join(lines) + "\n"


def load_instance(text: str) -> tuple[list[Bid], int, np.ndarray]:
    num_channels = None
    B = None
    edges = []
    bids_raw = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "channels":
            num_channels = int(parts[1])
        elif parts[0] == "bs":
            B = int(parts[1])
        elif parts[0] == "edge":
            edges.append((int(parts[1]), int(parts[2])))
        elif parts[0] == "bid":
            bids_raw.append((int(parts[1]), float(parts[2]),
                             tuple(int(x) for x in parts[3:])))
        else:
            raise ValueError(f"unknown line: {raw!r}")
    if num_channels is None or B is None:
        raise ValueError("instance needs 'channels' and 'bs' lines")
    adjacency = np.zeros((B, B), dtype=bool)
    for a, b in edges:
        adjacency[a, b] = adjacency[b, a] = True
    bids_raw.sort()
    bids = [Bid(v, d) for _, v, d in bids_raw]
    return bids, num_channels, adjacency
