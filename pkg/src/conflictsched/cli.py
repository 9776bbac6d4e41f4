"""Command-line entry point: ``conflictsched --benchmark tpcc --policy count/max/canonical/single ...``"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigurationError
from .harness.config import ExperimentConfig, ThrottleConfig
from .harness.experiment import run_experiment
from .harness.report import write_rows
from .state import EvictionConfig
from .workloads import BENCHMARKS, SkewSchedule


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conflictsched", description="Conflict-predictive transaction scheduling lab.")
    p.add_argument("--benchmark", choices=BENCHMARKS, default="tpcc")
    p.add_argument("--policy", default="count/max/canonical/single",
                   help='"random", "hard" or weight/combine/rep/gran, e.g. fraction/sum/literal/all')
    p.add_argument("--cc", choices=("occ", "2pl"), default="occ", help="concurrency control protocol")
    p.add_argument("--threads", type=int, default=4, help="worker threads (= run queues)")
    p.add_argument("--warehouses", type=int, default=None, help="TPC-C warehouse count (overrides --scale)")
    p.add_argument("--scale", type=float, default=0.1, help="table-size scale factor")
    p.add_argument("--phase1-secs", type=float, default=2.0)
    p.add_argument("--phase2-secs", type=float, default=10.0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--throttle", default="none", help="none, rate:<tps> or rt:<ms>")
    p.add_argument("--skew", default="", help='e.g. "uniform:60,zipf0.3:60,uniform:60"')
    p.add_argument("--continuous", action="store_true", help="single long run with History/State upkeep")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV output path; figures are written alongside")
    p.add_argument("--evict", default="", help='eviction settings, e.g. "r=0.5,t=5,window=5,cap=5000,gate=off"')
    p.add_argument("--regenerate-secs", type=float, default=60.0, help="History regeneration period (continuous)")
    p.add_argument("--driver", choices=("sim", "threads"), default="sim")
    p.add_argument("--op-cost-us", type=int, default=100, help="virtual cost of one row access")
    p.add_argument("--deadlock", choices=("wait-die", "no-wait"), default="wait-die")
    p.add_argument("--max-backlog", type=int, default=8192, help="unthrottled injection stops at this backlog")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    try:
        eviction = EvictionConfig.parse(args.evict) if args.evict else None
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    return ExperimentConfig(
        benchmark=args.benchmark,
        policy=args.policy,
        protocol=args.cc,
        threads=args.threads,
        warehouses=args.warehouses,
        scale=args.scale,
        phase1_seconds=args.phase1_secs,
        phase2_seconds=args.phase2_secs,
        repetitions=args.reps,
        throttle=ThrottleConfig.parse(args.throttle),
        skew=SkewSchedule.parse(args.skew) if args.skew else SkewSchedule(),
        continuous=args.continuous,
        seed=args.seed,
        out=args.out,
        eviction=eviction,
        regenerate_seconds=args.regenerate_secs,
        driver=args.driver,
        op_cost_us=args.op_cost_us,
        deadlock=args.deadlock,
        max_backlog=args.max_backlog,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = config_from_args(args)
        report = run_experiment(config)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if not config.out:
        write_rows(report, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
