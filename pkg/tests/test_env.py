import math

import numpy as np
import pytest

from slicesim import (Action, MobilityKernel, MuState, SimConfig, TaskKernel,
                      cpu_energy, queue_update, sample_arrivals, sp_payoff,
                      step_mobility, tx_energy, utility)
from slicesim.topology import Grid

TABLE = SimConfig()   # reference parameter set


# Mobility ---------------------------------------------------------------

def test_identity_kernel_keeps_location(rng):
    grid = Grid(5, 5, 50.0)
    kernel = MobilityKernel.identity(grid)
    for loc in (0, 7, 24):
        assert step_mobility(loc, kernel, rng) == loc


def test_lazy_walk_interior_probabilities():
    grid = Grid(5, 5, 50.0)
    kernel = MobilityKernel.lazy_walk(grid, stay_prob=0.6)
    center = grid.cell_to_loc(2, 2)
    row = kernel.matrix[center]
    assert row[center] == pytest.approx(0.6)
    for nbr in grid.neighbors4(center):
        assert row[nbr] == pytest.approx(0.1)


def test_lazy_walk_corner_renormalizes():
    grid = Grid(5, 5, 50.0)
    kernel = MobilityKernel.lazy_walk(grid, stay_prob=0.6)
    row = kernel.matrix[0]
    assert row[0] == pytest.approx(0.6)
    nbrs = grid.neighbors4(0)
    assert len(nbrs) == 2
    for nbr in nbrs:
        assert row[nbr] == pytest.approx(0.2)


def test_kernel_rows_stochastic_and_local():
    grid = Grid(6, 4, 50.0)
    kernel = MobilityKernel.lazy_walk(grid)
    assert np.allclose(kernel.matrix.sum(axis=1), 1.0, atol=1e-9)
    for loc in range(grid.num_locations):
        support = set(np.flatnonzero(kernel.matrix[loc] > 0))
        assert support <= {loc, *grid.neighbors4(loc)}


def test_kernel_rejects_nonlocal_moves():
    grid = Grid(4, 4, 50.0)
    bad = np.zeros((16, 16))
    bad[:, 0] = 1.0   # everyone teleports to the corner
    with pytest.raises(ValueError):
        MobilityKernel(bad, grid)


def test_mobility_empirical_matches_row(rng):
    grid = Grid(5, 5, 50.0)
    kernel = MobilityKernel.lazy_walk(grid)
    center = grid.cell_to_loc(2, 2)
    counts = np.zeros(grid.num_locations)
    n = 20000
    for _ in range(n):
        counts[step_mobility(center, kernel, rng)] += 1
    tv = 0.5 * np.abs(counts / n - kernel.matrix[center]).sum()
    assert tv < 0.02


# Arrivals ---------------------------------------------------------------

def test_zero_rate_means_no_packets(rng):
    state = MuState(0, 0, 0, 0)
    kernel = TaskKernel.uniform(5)
    for _ in range(200):
        _, packets = sample_arrivals(state, kernel, 0.0, rng, cap=0)
        assert packets == 0


def test_uniform_task_kernel_distribution(rng):
    kernel = TaskKernel.uniform(5)
    state = MuState(0, 0, 2, 0)
    n = 100000
    counts = np.zeros(6)
    for _ in range(n):
        tasks, _ = sample_arrivals(state, kernel, 0.0, rng, cap=0)
        counts[tasks] += 1
    tv = 0.5 * np.abs(counts / n - 1.0 / 6.0).sum()
    assert tv < 0.02


def test_poisson_mean_at_rate_eight(rng):
    kernel = TaskKernel.identity(5)
    state = MuState(0, 0, 0, 0)
    n = 100000
    total = 0
    for _ in range(n):
        _, packets = sample_arrivals(state, kernel, 8.0, rng, cap=32)
        total += packets
    assert total / n == pytest.approx(8.0, abs=0.1)


def test_arrival_cap_is_respected(rng):
    kernel = TaskKernel.identity(5)
    state = MuState(0, 0, 0, 0)
    for _ in range(5000):
        _, packets = sample_arrivals(state, kernel, 8.0, rng, cap=10)
        assert packets <= 10


# Queue ------------------------------------------------------------------

def test_queue_update_plain():
    assert queue_update(5, Action(1, 0, 2), 3, 10) == (6, 0)


def test_queue_update_pure_overflow():
    assert queue_update(10, Action(0, 0, 0), 3, 10) == (10, 3)


def test_queue_update_serve_and_clip():
    assert queue_update(9, Action(1, 0, 4), 7, 10) == (10, 2)


def test_queue_update_rejects_overdraw():
    with pytest.raises(ValueError):
        queue_update(3, Action(1, 0, 4), 0, 10)


def test_queue_conservation_property(rng):
    queue = 0
    total_arrived = total_served = total_dropped = 0
    for _ in range(5000):
        send = int(rng.integers(0, queue + 1))
        channel = int(rng.integers(0, 2))
        arrived = int(rng.integers(0, 14))
        new_queue, drops = queue_update(queue, Action(channel, 0, send), arrived, 10)
        assert 0 <= new_queue <= 10
        total_arrived += arrived
        total_served += channel * send
        total_dropped += drops
        # exact conservation from an initially empty queue
        assert total_dropped == total_arrived - total_served - new_queue
        queue = new_queue
    assert total_dropped == total_arrived - total_served - queue


# Transmit energy ---------------------------------------------------------

def test_tx_energy_zero_payload():
    assert tx_energy(Action(1, 0, 0), 1e-12, 1e-13, TABLE) == 0.0
    assert tx_energy(Action(0, 3, 5), 1e-12, 1e-13, TABLE) == 0.0


def test_tx_energy_worked_example():
    # one 5000-bit task through a 5000-bit slot: rate factor 2^1
    expected = (0.01 * 5e5 * 10 ** (-20.4)) * (2 ** 1 - 1) / (1e-12 - 1e-13 * 2 ** 1)
    got = tx_energy(Action(1, 1, 0), 1e-12, 1e-13, TABLE)
    assert got == pytest.approx(expected, rel=1e-9)
    assert got == pytest.approx(2.4881698159593577e-05, rel=1e-9)
    assert got <= TABLE.max_tx_energy_j


def test_tx_energy_negative_denominator_infeasible():
    assert tx_energy(Action(1, 1, 0), 1e-12, 6e-13, TABLE) is None


def test_tx_energy_no_secrecy_capacity():
    assert tx_energy(Action(1, 1, 0), 1e-13, 1e-12, TABLE) is None
    assert tx_energy(Action(1, 0, 0), 1e-13, 1e-12, TABLE) == 0.0


def test_tx_energy_power_cap():
    # weak uplink: even one packet costs more than the 0.03 J budget
    assert tx_energy(Action(1, 0, 1), 1e-18, 0.0, TABLE) is None


def test_tx_energy_increasing_in_payload():
    h_up, h_eve = 1e-11, 1e-14
    last = -1.0
    for send in range(0, 11):
        e = tx_energy(Action(1, 0, send), h_up, h_eve, TABLE)
        if e is None:
            break
        assert e > last or (send == 0 and e == 0.0)
        last = e


def test_tx_energy_feasible_iff_rate_below_secrecy_limit():
    h_up, h_eve = 1e-12, 1e-14
    for offload in range(6):
        for send in range(11):
            action = Action(1, offload, send)
            payload = 5000.0 * offload + 3000.0 * send
            factor = 2.0 ** (payload / 5000.0)
            e = tx_energy(action, h_up, h_eve, TABLE)
            if payload == 0:
                assert e == 0.0
                continue
            feasible_math = factor < h_up / h_eve
            if e is not None:
                assert feasible_math and e > 0.0
                assert e <= TABLE.max_tx_energy_j
            else:
                energy = (TABLE.noise_energy_j * (factor - 1)
                          / (h_up - h_eve * factor)) if feasible_math else None
                assert (not feasible_math) or energy > TABLE.max_tx_energy_j


def test_tx_energy_rejects_negative_gain():
    with pytest.raises(ValueError):
        tx_energy(Action(1, 1, 0), -1e-12, 1e-13, TABLE)


# CPU energy ---------------------------------------------------------------

def test_cpu_energy_full_offload_is_free():
    assert cpu_energy(3, Action(1, 3, 0), TABLE) == 0.0


def test_cpu_energy_single_task():
    expected = 2.5e-28 * 5000.0 * 737.5 * (2e9) ** 2
    got = cpu_energy(1, Action(0, 0, 0), TABLE)
    assert got == pytest.approx(expected, rel=1e-9)
    assert got == pytest.approx(3.6875e-3, rel=1e-9)


def test_cpu_energy_linear_in_residual():
    one = cpu_energy(1, Action(0, 0, 0), TABLE)
    five = cpu_energy(5, Action(0, 0, 0), TABLE)
    assert five == pytest.approx(5 * one, rel=1e-12)
    assert five == pytest.approx(1.84375e-2, rel=1e-9)


def test_cpu_energy_rejects_over_offload():
    with pytest.raises(ValueError):
        cpu_energy(2, Action(1, 3, 0), TABLE)


# Utility and payoff --------------------------------------------------------

def test_utility_maximum():
    # empty queue, nothing arrives, nothing to process: all four terms maximal
    state = MuState(0, 0, 0, 0)
    got = utility(state, Action(0, 0, 0), 0, 1e-12, 1e-13, TABLE)
    assert got == pytest.approx(1.0 + 1.0 + 3.0 * 2.0, rel=1e-12)


def test_utility_queue_of_one():
    # direct evaluation: exp(-1) + 1 + 3*2
    state = MuState(0, 0, 0, 1)
    got = utility(state, Action(1, 0, 1), 1, 1e-10, 1e-14, TABLE)
    expected = math.exp(-1.0) + 1.0 + 3.0 * (1.0 + math.exp(-tx_energy(
        Action(1, 0, 1), 1e-10, 1e-14, TABLE)))
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(7.367879, abs=5e-4)


def test_utility_loaded_case():
    # full queue, three drops, five local tasks, no transmission
    state = MuState(0, 0, 5, 10)
    got = utility(state, Action(0, 0, 0), 3, 1e-12, 1e-13, TABLE)
    expected = (math.exp(-10.0) + math.exp(-3.0)
                + 3.0 * (math.exp(-1.84375e-2) + 1.0))
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(5.99502676096408, rel=1e-9)


def test_utility_propagates_infeasible():
    state = MuState(0, 0, 1, 0)
    assert utility(state, Action(1, 1, 0), 0, 1e-13, 1e-12, TABLE) is None


def test_utility_bounds_and_monotonicity(rng):
    cap = 2.0 + 2.0 * TABLE.energy_weight
    for _ in range(300):
        tasks = int(rng.integers(0, 6))
        queue = int(rng.integers(0, 11))
        send = int(rng.integers(0, queue + 1))
        offload = int(rng.integers(0, tasks + 1))
        channel = int(rng.integers(0, 2))
        arrived = int(rng.integers(0, 20))
        u = utility(MuState(0, 0, tasks, queue), Action(channel, offload, send),
                    arrived, 1e-11, 1e-14, TABLE)
        if u is not None:
            assert 0.0 < u <= cap


def test_sp_payoff_examples():
    assert sp_payoff([8.0] * 6, [1.0] * 6, 0.0) == pytest.approx(48.0)
    assert sp_payoff([8.0, 7.3679], [1.0, 1.0], 3.5) == pytest.approx(11.8679)
    assert sp_payoff([], [], 2.5) == pytest.approx(-2.5)
    with pytest.raises(ValueError):
        sp_payoff([1.0], [1.0], -0.1)


def test_state_validation_bounds():
    state = MuState(0, 0, 7, 0)
    with pytest.raises(ValueError):
        state.validate(TABLE)
    MuState(0, 0, 5, 10).validate(TABLE)
    with pytest.raises(ValueError):
        MuState(-1, 0, 0, 0).validate(TABLE)
