import numpy as np
import pytest

from slicesim import (AuctionSolver, Bid, MuRequest, allocate_channels,
                      check_outcome, feasible, vcg_payment, winner_determination)
from slicesim.auction import dump_instance, load_instance, min_channels, vcg_payments
from slicesim.oracle import (enumerate_feasible, four_cycle_feasible,
                             four_cycle_min_channels, oracle_check,
                             random_instance)


@pytest.fixture(scope="module")
def cycle():
    adj = np.zeros((4, 4), dtype=bool)
    for a, b in ((0, 1), (0, 2), (1, 3), (2, 3)):
        adj[a, b] = adj[b, a] = True
    return adj


def single_bs():
    return np.zeros((1, 1), dtype=bool)


# Feasibility ----------------------------------------------------------------

def test_zero_demand_always_feasible(cycle):
    ok, witness = feasible((0, 0, 0, 0), 3, cycle)
    assert ok and witness == []


def test_diagonal_sharing_feasible(cycle):
    # diagonals here are (0,3) and (1,2): 3 channels shared by {0,3}, 2 by {1,2}
    ok, witness = feasible((3, 2, 2, 3), 5, cycle)
    assert ok
    served = [sum(1 for s in witness if b in s) for b in range(4)]
    assert served == [3, 2, 2, 3]
    assert len(witness) <= 5
    for s in witness:
        for a in s:
            for b in s:
                assert a == b or not cycle[a, b]


def test_adjacent_overload_infeasible(cycle):
    ok, witness = feasible((3, 3, 0, 0), 5, cycle)
    assert not ok and witness is None
    # (0,2) is an edge too: the same overload across it is also infeasible
    assert not feasible((3, 0, 3, 0), 5, cycle)[0]


def test_feasible_matches_closed_form_sample(cycle, rng):
    for _ in range(300):
        d = tuple(int(x) for x in rng.integers(0, 7, size=4))
        j = int(rng.integers(1, 13))
        assert feasible(d, j, cycle)[0] == four_cycle_feasible(d, j, cycle)


def test_feasible_matches_enumeration_on_other_graphs(rng):
    path3 = np.zeros((3, 3), dtype=bool)
    path3[0, 1] = path3[1, 0] = path3[1, 2] = path3[2, 1] = True
    for adj in (single_bs(), path3):
        B = adj.shape[0]
        for _ in range(200):
            d = tuple(int(x) for x in rng.integers(0, 4, size=B))
            j = int(rng.integers(1, 4))
            assert feasible(d, j, adj)[0] == enumerate_feasible(d, j, adj)


def test_min_channels_closed_form(cycle, rng):
    for _ in range(200):
        d = tuple(int(x) for x in rng.integers(0, 7, size=4))
        needed = four_cycle_min_channels(d, cycle)
        got = min_channels(d, cycle, 12)
        if needed <= 12:
            assert got == needed
        else:
            assert got is None


# Winner determination --------------------------------------------------------

def test_single_bidder_wins():
    winners = winner_determination([Bid(4.0, (1,))], 2, single_bs())
    assert winners.tolist() == [True]


def test_three_bidders_one_channel():
    bids = [Bid(5.0, (1,)), Bid(3.0, (1,)), Bid(2.0, (1,))]
    winners = winner_determination(bids, 1, single_bs())
    assert winners.tolist() == [True, False, False]


def test_tie_breaks_are_deterministic(cycle):
    # {sp1} and {sp2, sp3} both give welfare 5 with one channel; the
    # lexicographically smaller winner set must win
    bids = [Bid(5.0, (1, 0, 0, 1)), Bid(3.0, (1, 0, 0, 0)), Bid(2.0, (0, 0, 0, 1))]
    winners = winner_determination(bids, 1, cycle)
    assert winners.tolist() == [True, False, False]


def test_tie_break_prefers_fewer_channels(cycle):
    # equal welfare, together infeasible at J=2; sp0 needs two channels, sp1 one
    bids = [Bid(4.0, (1, 1, 0, 0)), Bid(4.0, (1, 0, 0, 0))]
    winners = winner_determination(bids, 2, cycle)
    assert winners.tolist() == [False, True]


def test_zero_demand_abstainer_joins_harmlessly(cycle):
    # welfare and channel count tie with or without the empty bid; the
    # lexicographic rule then keeps the lower index set {0, 1}
    bids = [Bid(0.0, (0, 0, 0, 0)), Bid(1.0, (1, 0, 0, 0))]
    winners = winner_determination(bids, 1, cycle)
    assert winners.tolist() == [True, True]
    assert vcg_payments(bids, winners, 1, cycle).tolist() == [0.0, 0.0]


# VCG payments ----------------------------------------------------------------

def test_sole_bidder_pays_nothing():
    bids = [Bid(7.0, (1,))]
    winners = winner_determination(bids, 1, single_bs())
    assert vcg_payment(bids, winners, 1, single_bs(), 0) == 0.0


def test_payment_is_displaced_welfare():
    bids = [Bid(5.0, (1,)), Bid(3.0, (1,)), Bid(2.0, (1,))]
    winners = winner_determination(bids, 1, single_bs())
    assert vcg_payment(bids, winners, 1, single_bs(), 0) == pytest.approx(3.0)
    assert vcg_payment(bids, winners, 1, single_bs(), 1) == 0.0


def test_compatible_bidders_pay_nothing(cycle):
    bids = [Bid(5.0, (1, 0, 0, 0)), Bid(3.0, (0, 1, 0, 0)), Bid(2.0, (0, 0, 0, 1))]
    winners = winner_determination(bids, 6, cycle)
    assert winners.all()
    pays = vcg_payments(bids, winners, 6, cycle)
    assert pays.tolist() == [0.0, 0.0, 0.0]


def test_individual_rationality_random(cycle, rng):
    for _ in range(200):
        bids, j = random_instance(rng, cycle)
        winners = winner_determination(bids, j, cycle)
        pays = vcg_payments(bids, winners, j, cycle)
        for i, bid in enumerate(bids):
            assert pays[i] >= 0.0
            if winners[i]:
                assert pays[i] <= bid.valuation + 1e-9
            else:
                assert pays[i] == 0.0


# Allocation ------------------------------------------------------------------

def _requests_for(bids, wanting=None):
    requests, mu = [], 0
    for sp, bid in enumerate(bids):
        for b, count in enumerate(bid.demand):
            for _ in range(count):
                requests.append(MuRequest(mu=mu, sp=sp, bs=b, wants=True))
                mu += 1
    return requests


def test_no_winners_empty_allocation(cycle):
    bids = [Bid(0.0, (0, 0, 0, 0))]
    winners = np.array([False])
    assert allocate_channels(winners, bids, [], []) == {}


def test_allocation_satisfies_all_constraints(cycle):
    bids = [Bid(5.0, (3, 2, 0, 0)), Bid(4.0, (0, 0, 2, 3))]
    solver = AuctionSolver(cycle, 5)
    requests = _requests_for(bids)
    outcome = solver.run(bids, requests)
    assert outcome.winners.all()
    check_outcome(outcome, bids, requests, cycle, 5)
    assert len(outcome.assignment) == 10


def test_same_area_users_get_distinct_channels():
    bids = [Bid(2.0, (2,))]
    solver = AuctionSolver(single_bs(), 3)
    requests = [MuRequest(0, 0, 0, True), MuRequest(1, 0, 0, True)]
    outcome = solver.run(bids, requests)
    assert outcome.assignment[0] != outcome.assignment[1]


def test_witness_mismatch_fails_loudly(cycle):
    bids = [Bid(5.0, (2, 0, 0, 0))]
    winners = np.array([True])
    requests = [MuRequest(0, 0, 0, True), MuRequest(1, 0, 0, True)]
    with pytest.raises(RuntimeError):
        allocate_channels(winners, bids, requests, [frozenset({0})])


def test_checker_catches_adjacent_reuse(cycle):
    bids = [Bid(5.0, (1, 0, 0, 0)), Bid(4.0, (0, 1, 0, 0))]
    solver = AuctionSolver(cycle, 4)
    requests = [MuRequest(0, 0, 0, True), MuRequest(1, 1, 1, True)]
    outcome = solver.run(bids, requests)
    outcome.assignment[1] = outcome.assignment[0]   # corrupt: share a channel
    with pytest.raises(AssertionError):
        check_outcome(outcome, bids, requests, cycle, 4)


# Oracle harness ---------------------------------------------------------------

def test_brute_force_oracle_small_batch(cycle):
    report = oracle_check(300, seed=42, adjacency=cycle)
    assert report.ok, report.first_failure


def test_instance_dump_load_round_trip(cycle, rng):
    bids, j = random_instance(rng, cycle)
    text = dump_instance(bids, j, cycle)
    bids2, j2, adj2 = load_instance(text)
    assert j2 == j
    assert np.array_equal(adj2, cycle)
    assert bids2 == bids


def test_solver_matches_free_functions(cycle, rng):
    for _ in range(60):
        bids, j = random_instance(rng, cycle)
        solver = AuctionSolver(cycle, j)
        winners_free = winner_determination(bids, j, cycle)
        outcome = solver.run(bids, _requests_for(bids))
        assert np.array_equal(outcome.winners, winners_free)
        pays_free = vcg_payments(bids, winners_free, j, cycle)
        assert np.allclose(outcome.payments, pays_free)


def test_load_instance_rejects_garbage():
    with pytest.raises(ValueError):
        load_instance("bid 0 1.0 1\n")          # missing channels/bs lines
    with pytest.raises(ValueError):
        load_instance("channels 2\nbs 1\nwhat 3\n")
