"""Command-line entry point: run, sweep, eval, oracle-check."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .checkpoint import load_checkpoint, save_checkpoint
from .config import SimConfig
from .harness import (POLICIES, SimInvariantError, Simulation,
                      evaluate_policy, make_spec, run, sweep)
from .oracle import oracle_check
from .topology import build_default_topology

log = logging.getLogger(__name__)


def _load_config(args) -> SimConfig:
    if args.config:
        cfg = SimConfig.load(args.config)
    else:
        cfg = SimConfig()
    if not getattr(args, "full_scale", False) and not args.config:
        cfg = cfg.desk_scale()
    return cfg


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="key-value config file")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--full-scale", action="store_true",
                   help="use the full default scale (6 users per provider)")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="slicesim")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one seeded experiment")
    _add_common(p_run)
    p_run.add_argument("--policy", choices=POLICIES, default="drl")
    p_run.add_argument("--slots", type=int, default=20000)
    p_run.add_argument("--window", type=int, default=5000)
    p_run.add_argument("--no-slots-csv", action="store_true",
                       help="skip the per-slot CSV (summary only)")
    p_run.add_argument("--checkpoint", action="store_true",
                       help="save agent state next to the CSVs")

    p_sweep = sub.add_parser("sweep", help="axis sweep across policies and seeds")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", choices=("lambda", "J"), required=True)
    p_sweep.add_argument("--values", type=str, required=True,
                         help="comma-separated axis values")
    p_sweep.add_argument("--policies", type=str, default=",".join(POLICIES))
    p_sweep.add_argument("--seeds", type=str, default=None,
                         help="comma-separated seeds (default: --seed)")
    p_sweep.add_argument("--slots", type=int, default=20000)
    p_sweep.add_argument("--window", type=int, default=5000)
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_eval = sub.add_parser("eval", help="Monte-Carlo payoff of a frozen policy")
    _add_common(p_eval)
    p_eval.add_argument("--policy", choices=POLICIES, default="drl")
    p_eval.add_argument("--episodes", type=int, default=10)
    p_eval.add_argument("--horizon", type=int, default=200)
    p_eval.add_argument("--load-checkpoint", type=str, default=None)

    p_oracle = sub.add_parser("oracle-check",
                              help="compare the auction against brute force")
    p_oracle.add_argument("--instances", type=int, default=10000)
    p_oracle.add_argument("--seed", type=int, default=1)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except SimInvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "run":
        cfg = _load_config(args)
        spec = make_spec(cfg, args.policy, args.slots, args.seed,
                         window=args.window, out_dir=args.out,
                         record_slots=not args.no_slots_csv,
                         log_every=max(args.slots // 20, 1))
        sim = Simulation(spec)
        result = run(spec, sim=sim)
        if args.checkpoint and args.out:
            save_checkpoint(Path(args.out) / "checkpoint.npz", sim.agents, sim.learners)
        if result.final is not None:
            print(f"final window avg utility/mu/slot: {result.final.avg_utility_per_mu:.6f}")
        return 0

    if args.command == "sweep":
        cfg = _load_config(args)
        values = [float(v) for v in args.values.split(",")]
        policies = [p.strip() for p in args.policies.split(",") if p.strip()]
        seeds = ([int(s) for s in args.seeds.split(",")]
                 if args.seeds else [args.seed])
        result = sweep(cfg, args.axis, values, policies, seeds, args.slots,
                       out_dir=args.out, window=args.window, jobs=args.jobs)
        print(f"{len(result.rows)} summary rows"
              + (f" -> {result.summary_path}" if result.summary_path else ""))
        return 0

    if args.command == "eval":
        cfg = _load_config(args)
        spec = make_spec(cfg, args.policy, max(args.horizon, 1), args.seed)
        sim = Simulation(spec)
        if args.load_checkpoint:
            load_checkpoint(args.load_checkpoint, sim.agents, sim.learners)
        stats = evaluate_policy(spec, args.episodes, args.horizon,
                                agents=sim.agents, learners=sim.learners)
        for i, (mean, se) in enumerate(stats):
            print(f"sp{i}: discounted payoff {mean:.6f} +- {se:.6f}")
        return 0

    if args.command == "oracle-check":
        cfg = SimConfig().desk_scale()
        topology = build_default_topology(cfg)
        report = oracle_check(args.instances, args.seed, topology.adjacency)
        if report.ok:
            print(f"oracle-check: {report.instances} instances, all matched")
            return 0
        print(f"oracle-check: {report.mismatches} mismatches\n{report.first_failure}",
              file=sys.stderr)
        return 1

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
