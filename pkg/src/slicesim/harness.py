"""Experiment orchestration: the seeded slot loop, evaluation, and sweeps.

Slot order: (1) mobility and arrivals realize the users' states; (2) users
report channel preferences and values; (3) providers build bids; (4) the
orchestrator runs the channel auction (winners, payments, allocation);
(5) users act under their realized channel flags; (6) queues, energies,
utilities, and provider payoffs are realized; (7) learners update (replay
training for users, transition counts and payment values for providers).
Every slot passes an invariant checker; violations abort with the slot number.

Randomness is split into named streams (mobility, per-user arrivals,
exploration, baseline draws) so swapping policies never perturbs the
environment's draws; paired policy comparisons share identical sample paths.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .auction import AuctionSolver, Bid, MuRequest, check_outcome
from .baselines import BaselineKind, baseline_act, baseline_bid
from .config import SimConfig
from .env import (Action, MobilityKernel, MuState, TaskKernel, cpu_energy,
                  queue_update, sample_arrivals, sp_payoff, step_mobility,
                  tx_energy)
from .mu_learner import Decision, MuAgent, QNet
from .rng import named_stream
from .slotlog import (SlotRecord, SlotWriter, SummaryAccumulator, SummaryRow,
                      write_summary_csv)
from .sp_agent import MuReport, SpLearner
from .topology import GainModel, GainTables, build_default_topology

log = logging.getLogger(__name__)

POLICY_DRL = "drl"
POLICIES = (POLICY_DRL, "channel_aware", "queue_aware", "random")


class SimInvariantError(RuntimeError):
    """A per-slot invariant failed; the run must not continue."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One run: configuration, per-provider policies, horizon, seed, metrics."""

    config: SimConfig
    policies: tuple[str, ...]
    horizon: int
    seed: int
    window: int = 5000
    out_dir: str | None = None
    record_slots: bool = True
    log_every: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least one slot")
        if len(self.policies) != self.config.num_sps:
            raise ValueError("need one policy per provider")
        for p in self.policies:
            if p not in POLICIES:
                raise ValueError(f"unknown policy {p!r}")
        if self.window < 1:
            raise ValueError("window must be positive")

    @property
    def policy_label(self) -> str:
        return self.policies[0] if len(set(self.policies)) == 1 else "mixed"


def make_spec(config: SimConfig, policy: str, horizon: int, seed: int,
              **kwargs) -> ExperimentSpec:
    """Spec with the same policy for every provider."""
    return ExperimentSpec(config, (policy,) * config.num_sps, horizon, seed, **kwargs)


class Simulation:
    """Mutable state of one run; step() advances a single scheduling slot."""

    def __init__(self, spec: ExperimentSpec, agents: list[MuAgent] | None = None,
                 learners: dict[int, SpLearner] | None = None, learn: bool = True,
                 eps_override: float | None = None, stream_suffix: str = "",
                 mobility_kernel: MobilityKernel | None = None,
                 task_kernel: TaskKernel | None = None):
        cfg = spec.config
        self.spec = spec
        self.cfg = cfg
        self.learn = learn
        self.eps = cfg.explore_eps if eps_override is None else eps_override
        self.topology = build_default_topology(cfg)
        self.grid = self.topology.grid
        self.model = GainModel.from_config(cfg)
        self.tables = GainTables(self.topology, self.model)
        self.mobility = mobility_kernel or MobilityKernel.lazy_walk(self.grid, cfg.stay_prob)
        self.tasks_chain = task_kernel or TaskKernel.uniform(cfg.task_cap)
        self.solver = AuctionSolver(self.topology.adjacency, cfg.num_channels)

        seed = spec.seed
        sfx = stream_suffix
        self.mob_rng = named_stream(seed, f"mobility{sfx}")
        init_rng = named_stream(seed, f"init{sfx}")
        self.arrival_rngs = [named_stream(seed, f"arrivals/{n}{sfx}")
                             for n in range(cfg.num_mus)]
        self.explore_rngs = [named_stream(seed, f"explore/{n}{sfx}")
                             for n in range(cfg.num_mus)]
        self.replay_rngs = [named_stream(seed, f"replay/{n}{sfx}")
                            for n in range(cfg.num_mus)]
        self.baseline_mu_rngs = [named_stream(seed, f"baseline-mu/{n}{sfx}")
                                 for n in range(cfg.num_mus)]
        self.baseline_sp_rngs = [named_stream(seed, f"baseline-sp/{i}{sfx}")
                                 for i in range(cfg.num_sps)]

        # agents and provider learners (DRL providers only)
        if agents is not None:
            self.agents = agents
        else:
            self.agents = []
            shared: dict[int, QNet] = {}
            for n in range(cfg.num_mus):
                sp = n // cfg.mus_per_sp
                if spec.policies[sp] != POLICY_DRL:
                    self.agents.append(None)
                    continue
                net = None
                if cfg.share_mu_nets:
                    if sp not in shared:
                        rng = named_stream(seed, f"weights/sp{sp}{sfx}")
                        shared[sp] = QNet((6, *cfg.hidden_sizes, cfg.action_count),
                                          rng, lr=cfg.adam_lr)
                    net = shared[sp]
                rng = named_stream(seed, f"weights/{n}{sfx}")
                self.agents.append(MuAgent(cfg, self.grid, self.tables, rng, net=net))
        if learners is not None:
            self.learners = learners
        else:
            self.learners = {i: SpLearner(cfg) for i in range(cfg.num_sps)
                             if spec.policies[i] == POLICY_DRL}

        # environment state
        self.eve_loc = int(init_rng.integers(cfg.num_locations))
        self.mu_loc = [int(init_rng.integers(cfg.num_locations))
                       for _ in range(cfg.num_mus)]
        self.mu_tasks = [0] * cfg.num_mus
        self.mu_queue = [0] * cfg.num_mus
        self.pending: list[tuple[Decision, Action, float] | None] = [None] * cfg.num_mus
        self.slot = 0

    def sp_of(self, mu: int) -> int:
        return mu // self.cfg.mus_per_sp

    def mus_of(self, sp: int) -> range:
        return range(sp * self.cfg.mus_per_sp, (sp + 1) * self.cfg.mus_per_sp)

    def step(self) -> SlotRecord:
        cfg = self.cfg
        k = self.slot + 1

        # (1) mobility and arrivals realize this slot's states
        self.eve_loc = step_mobility(self.eve_loc, self.mobility, self.mob_rng)
        arrived: list[int] = []
        states: list[MuState] = []
        for n in range(cfg.num_mus):
            self.mu_loc[n] = step_mobility(self.mu_loc[n], self.mobility, self.mob_rng)
            prev = MuState(self.mu_loc[n], self.eve_loc, self.mu_tasks[n], self.mu_queue[n])
            tasks, packets = sample_arrivals(prev, self.tasks_chain, cfg.arrival_rate,
                                             self.arrival_rngs[n], cfg.poisson_cap)
            self.mu_tasks[n] = tasks
            arrived.append(packets)
            state = MuState(self.mu_loc[n], self.eve_loc, tasks, self.mu_queue[n])
            state.validate(cfg)
            states.append(state)

        h_up = [self.tables.uplink(s.loc) for s in states]
        h_eve = [self.tables.eavesdrop(s.loc, s.eve_loc) for s in states]

        # (2)-(3) preferences and bids
        bids: list[Bid] = []
        wants: list[int] = [0] * cfg.num_mus
        decisions: list = [None] * cfg.num_mus
        for i in range(cfg.num_sps):
            policy = self.spec.policies[i]
            members = list(self.mus_of(i))
            if policy == POLICY_DRL:
                reports = []
                for n in members:
                    agent = self.agents[n]
                    d = agent.decide(states[n])
                    decisions[n] = d
                    z, value = agent.channel_preference(states[n], d.q_masked)
                    wants[n] = z
                    reports.append(MuReport(value, z, states[n].loc, cfg.unit_price))
                bids.append(self.learners[i].bid(reports, self.topology))
            else:
                kind = BaselineKind(policy)
                bid, z_list = baseline_bid(kind, [states[n] for n in members],
                                           [h_up[n] for n in members],
                                           [h_eve[n] for n in members],
                                           cfg, self.topology, self.baseline_sp_rngs[i])
                for n, z in zip(members, z_list):
                    wants[n] = z
                bids.append(bid)

        # (4) channel auction
        requests = [MuRequest(mu=n, sp=self.sp_of(n),
                              bs=self.topology.serving_bs(states[n].loc),
                              wants=bool(wants[n]))
                    for n in range(cfg.num_mus)]
        outcome = self.solver.run(bids, requests)
        try:
            check_outcome(outcome, bids, requests, self.topology.adjacency,
                          cfg.num_channels)
        except AssertionError as exc:
            raise SimInvariantError(f"slot {k}: auction invariant failed: {exc}") from exc

        # (5) actions under the realized channel flags
        actions: list[Action] = []
        for n in range(cfg.num_mus):
            realized = 1 if n in outcome.assignment else 0
            if self.spec.policies[self.sp_of(n)] == POLICY_DRL:
                action = self.agents[n].act(states[n], realized, self.eps,
                                            self.explore_rngs[n],
                                            decisions[n].q_masked)
            else:
                action = baseline_act(states[n], realized, h_up[n], h_eve[n],
                                      cfg, self.baseline_mu_rngs[n])
            actions.append(action)

        # (6) realized queues, energies, utilities, payoffs
        utilities: list[float] = []
        tx_js: list[float] = []
        cpu_js: list[float] = []
        new_queues: list[int] = []
        drops: list[int] = []
        for n, action in enumerate(actions):
            try:
                e_tx = tx_energy(action, h_up[n], h_eve[n], cfg)
                e_cpu = cpu_energy(states[n].tasks, action, cfg)
                w2, d = queue_update(states[n].queue, action, arrived[n], cfg.queue_cap)
            except ValueError as exc:
                raise SimInvariantError(f"slot {k}: user {n} executed an invalid "
                                        f"action {action}: {exc}") from exc
            if e_tx is None:
                raise SimInvariantError(f"slot {k}: user {n} executed an infeasible action")
            if not 0 <= w2 <= cfg.queue_cap:
                raise SimInvariantError(f"slot {k}: queue bound violated for user {n}")
            u = (math.exp(-float(w2)) + math.exp(-float(d))
                 + cfg.energy_weight * (math.exp(-e_cpu) + math.exp(-e_tx)))
            utilities.append(u)
            tx_js.append(e_tx)
            cpu_js.append(e_cpu)
            new_queues.append(w2)
            drops.append(d)
        payoffs = [sp_payoff([utilities[n] for n in self.mus_of(i)],
                             [cfg.unit_price] * cfg.mus_per_sp,
                             float(outcome.payments[i]))
                   for i in range(cfg.num_sps)]

        # (7) learning
        if self.learn:
            for n in range(cfg.num_mus):
                if self.spec.policies[self.sp_of(n)] != POLICY_DRL:
                    continue
                agent = self.agents[n]
                if self.pending[n] is not None:
                    prev_d, act_prev, u_prev = self.pending[n]
                    agent.push_transition(prev_d, act_prev, u_prev, decisions[n])
                self.pending[n] = (decisions[n], actions[n], utilities[n])
                agent.train(self.replay_rngs[n])
                if k % cfg.sync_period == 0:
                    agent.sync_target()
            for i, learner in self.learners.items():
                learner.observe_auction(float(outcome.payments[i]),
                                        int(outcome.winners[i]), k)

        # (8) commit state and emit the record
        for n in range(cfg.num_mus):
            self.mu_queue[n] = new_queues[n]
        self.slot = k
        return SlotRecord(
            slot=k, eve_loc=self.eve_loc,
            valuations=[b.valuation for b in bids],
            winners=[int(w) for w in outcome.winners],
            payments=[float(p) for p in outcome.payments],
            payoffs=payoffs,
            mu_loc=[s.loc for s in states],
            mu_tasks=[s.tasks for s in states],
            mu_queue=[s.queue for s in states],
            mu_channel=[outcome.assignment.get(n, -1) for n in range(cfg.num_mus)],
            mu_offload=[a.offload for a in actions],
            mu_send=[a.send for a in actions],
            mu_arrived=arrived,
            mu_queue_next=new_queues,
            mu_drops=drops,
            mu_utility=utilities,
            mu_cpu_j=cpu_js,
            mu_tx_j=tx_js,
        )


@dataclass
class RunResult:
    rows: list[SummaryRow]
    final: SummaryRow | None
    slots_path: Path | None
    summary_path: Path | None
    records: list[SlotRecord] | None


def run(spec: ExperimentSpec, keep_records: bool = False,
        sim: Simulation | None = None) -> RunResult:
    """Execute one experiment: slot loop, CSV emission, windowed summary."""
    sim = sim or Simulation(spec)
    out_dir = Path(spec.out_dir) if spec.out_dir else None
    writer = None
    slots_path = summary_path = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        if spec.record_slots:
            slots_path = out_dir / "slots.csv"
            writer = SlotWriter(slots_path, spec.config.num_sps, spec.config.num_mus)
    acc = SummaryAccumulator(spec.window, spec.policy_label,
                             spec.config.arrival_rate, spec.config.num_channels,
                             spec.seed)
    records: list[SlotRecord] | None = [] if keep_records else None
    try:
        for k in range(spec.horizon):
            rec = sim.step()
            if writer is not None:
                writer.write(rec)
            if records is not None:
                records.append(rec)
            acc.add(rec)
            if spec.log_every and (k + 1) % spec.log_every == 0:
                log.info("slot %d/%d: windowed rows=%d", k + 1, spec.horizon, len(acc.rows))
    finally:
        if writer is not None:
            writer.close()
    if out_dir is not None:
        summary_path = out_dir / "summary.csv"
        write_summary_csv(summary_path, acc.rows)
    final = acc.rows[-1] if acc.rows else None
    return RunResult(acc.rows, final, slots_path, summary_path, records)


def evaluate_policy(spec: ExperimentSpec, episodes: int, horizon: int,
                    agents: list[MuAgent] | None = None,
                    learners: dict[int, SpLearner] | None = None
                    ) -> list[tuple[float, float]]:
    """Monte-Carlo estimate of each provider's normalized discounted payoff.

    Learning and exploration are disabled. Per episode the estimator is
    (1-g) * sum_k g^(k-1) * payoff_k; returns (mean, standard error) per
    provider over the episodes.
    """
    if episodes < 1 or horizon < 1:
        raise ValueError("episodes and horizon must be positive")
    cfg = spec.config
    totals = np.zeros((episodes, cfg.num_sps))
    for e in range(episodes):
        sim = Simulation(spec, agents=agents, learners=learners, learn=False,
                         eps_override=0.0, stream_suffix=f"|eval{e}")
        weight = 1.0
        for _ in range(horizon):
            rec = sim.step()
            totals[e] += weight * np.asarray(rec.payoffs)
            weight *= cfg.discount
        totals[e] *= (1.0 - cfg.discount)
    means = totals.mean(axis=0)
    if episodes > 1:
        ses = totals.std(axis=0, ddof=1) / math.sqrt(episodes)
    else:
        ses = np.zeros(cfg.num_sps)
    return [(float(m), float(s)) for m, s in zip(means, ses)]


# Sweeps and grids ------------------------------------------------------------

SWEEP_AXES = ("lambda", "J")


def _grid_job(args) -> list[SummaryRow]:
    config, arrival_rate, num_channels, policy, seed, horizon, window = args
    cfg = dataclasses.replace(config, arrival_rate=float(arrival_rate),
                              num_channels=int(num_channels))
    spec = make_spec(cfg, policy, horizon, seed, window=window,
                     record_slots=False)
    return run(spec).rows


@dataclass
class GridResult:
    rows: list[SummaryRow]
    summary_path: Path | None

    def final(self, arrival_rate: float, num_channels: int, policy: str,
              seed: int) -> float:
        """Final-window utility of one run in the grid."""
        match = [r for r in self.rows
                 if r.policy == policy and r.seed == seed
                 and r.arrival_rate == float(arrival_rate)
                 and r.num_channels == int(num_channels)]
        if not match:
            raise ValueError(f"no rows for lambda={arrival_rate} J={num_channels} "
                             f"policy={policy} seed={seed}")
        return max(match, key=lambda r: r.slot_window).avg_utility_per_mu

    def final_mean(self, arrival_rate: float, num_channels: int, policy: str,
                   seeds) -> float:
        return float(np.mean([self.final(arrival_rate, num_channels, policy, s)
                              for s in seeds]))


def run_grid(config: SimConfig, points, policies, seeds, horizon: int,
             out_dir: str | None = None, window: int = 5000,
             jobs: int = 1) -> GridResult:
    """Runs over (arrival rate, channel count) points x policies x seeds.

    Identical seeds across policies at each point keep comparisons paired.
    All windowed rows merge into one summary.csv, sorted deterministically.
    """
    points = [(float(lam), int(j)) for lam, j in points]
    policies = list(policies)
    seeds = list(seeds)
    if not points or not policies or not seeds:
        raise ValueError("points, policies, and seeds must be non-empty")
    jobs_args = [(config, lam, j, policy, seed, horizon, window)
                 for lam, j in points for policy in policies for seed in seeds]
    if jobs > 1:
        ctx = multiprocessing.get_context("spawn")
        with ctx.Pool(processes=jobs) as pool:
            results = pool.map(_grid_job, jobs_args)
    else:
        results = [_grid_job(a) for a in jobs_args]
    rows = [row for rows_ in results for row in rows_]
    rows.sort(key=lambda r: (r.arrival_rate, r.num_channels,
                             policies.index(r.policy), r.seed, r.slot_window))
    summary_path = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        summary_path = out / "summary.csv"
        write_summary_csv(summary_path, rows)
    return GridResult(rows, summary_path)


@dataclass
class SweepResult:
    rows: list[SummaryRow]
    summary_path: Path | None
    table_path: Path | None


def sweep(config: SimConfig, axis: str, values, policies, seeds, horizon: int,
          out_dir: str | None = None, window: int = 5000,
          jobs: int = 1) -> SweepResult:
    """Grid of runs over one axis; identical seeds across policies per point.

    Emits a merged summary.csv (every window of every run) plus sweep.csv with
    one row per (axis value, policy): the final-window utility averaged over
    seeds.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    values = list(values)
    if axis == "lambda":
        points = [(float(v), config.num_channels) for v in values]
    else:
        points = [(config.arrival_rate, int(v)) for v in values]
    grid = run_grid(config, points, policies, seeds, horizon,
                    out_dir=out_dir, window=window, jobs=jobs)

    table_path = None
    if out_dir is not None:
        table_path = Path(out_dir) / "sweep.csv"
        with open(table_path, "w", newline="\n") as fh:
            fh.write("axis,value,policy,avg_utility_per_mu,seeds\n")
            for (lam, j), value in zip(points, values):
                for policy in policies:
                    mean = grid.final_mean(lam, j, policy, seeds)
                    fh.write(f"{axis},{value},{policy},{mean:.10e},{len(list(seeds))}\n")
    return SweepResult(grid.rows, grid.summary_path, table_path)
