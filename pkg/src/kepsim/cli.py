"""Command-line front end.

Subcommands: simulate, learn, sweep, fairness, export-instance.  A json
config file (--config) overrides built-in defaults; explicit flags override
the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .fairness import scaled_measure, welfare_scores
from .harness import (
    ExperimentConfig,
    emit_report,
    emit_sweep,
    instance_at_period,
    run_experiment,
    sweep,
)
from .learn import LearningConfig, UpdateRule, run_learning
from .pool import PoolConfig
from .solver import export_instance
from .weights import save_weight_table


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="json file with ExperimentConfig fields")
    p.add_argument("--scheme", choices=["myopic", "kpd", "learned"])
    p.add_argument("--weights-file", help="weight table for --scheme learned")
    p.add_argument("--W", type=float, dest="ndad_penalty", help="altruist penalty")
    p.add_argument("--C", type=int, dest="max_cycle", help="max pairs per cycle")
    p.add_argument("--P", type=int, dest="max_chain", help="max patients per chain")
    p.add_argument("--pair-rate", type=float, help="mean pair arrivals per period")
    p.add_argument("--ndad-rate", type=float, help="mean altruist arrivals per period")
    p.add_argument("--periods", type=int, help="matching periods per replication")
    p.add_argument("--reps", type=int, dest="replications")
    p.add_argument("--seed", type=int, dest="base_seed")
    p.add_argument("--workers", type=int, help="parallel replication workers")
    p.add_argument("--out", help="output path prefix")
    p.add_argument("--format", choices=["csv", "json", "both"], default=None)


_POOL_KEYS = ("pair_rate", "ndad_rate", "periods", "blood_dist", "band_dist")
_CFG_KEYS = (
    "scheme", "weights_file", "ndad_penalty", "max_cycle", "max_chain",
    "replications", "base_seed", "solver_timeout", "candidate_budget",
    "workers", "baseline_welfare",
)


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """defaults < config file < command-line flags."""
    cfg_kwargs: dict = {}
    pool_kwargs: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        pool_section = file_cfg.pop("pool", {})
        for key in _POOL_KEYS:
            if key in pool_section:
                pool_kwargs[key] = pool_section[key]
            if key in file_cfg:
                pool_kwargs[key] = file_cfg.pop(key)
        for key in _CFG_KEYS:
            if key in file_cfg:
                cfg_kwargs[key] = file_cfg[key]
    for key in _CFG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg_kwargs[key] = val
    for key in ("pair_rate", "ndad_rate", "periods"):
        val = getattr(args, key, None)
        if val is not None:
            pool_kwargs[key] = val
    for tup in ("blood_dist", "band_dist"):
        if tup in pool_kwargs:
            pool_kwargs[tup] = tuple(pool_kwargs[tup])
    if "baseline_welfare" in cfg_kwargs and cfg_kwargs["baseline_welfare"] is not None:
        cfg_kwargs["baseline_welfare"] = tuple(cfg_kwargs["baseline_welfare"])
    return ExperimentConfig(pool=PoolConfig(**pool_kwargs), **cfg_kwargs)


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    report = run_experiment(cfg)
    out = args.out or "report"
    written = emit_report(report, out, args.format or "both")
    agg = report.aggregate
    if agg:
        print(
            f"{cfg.scheme} W={cfg.ndad_penalty} reps={cfg.replications}: "
            f"matches={agg.matches:.2f} %match={agg.pct_match:.2f} "
            f"wait={agg.wait_all_months:.2f}mo"
        )
    if report.incomplete:
        print(f"INCOMPLETE: {len(report.failures)} replication(s) aborted", file=sys.stderr)
        for msg in report.failures:
            print(f"  {msg}", file=sys.stderr)
    for path in written:
        print(f"wrote {path}")
    return 1 if report.incomplete else 0


def _cmd_learn(args: argparse.Namespace) -> int:
    pool_kwargs: dict = {}
    for key in ("pair_rate", "ndad_rate", "periods"):
        val = getattr(args, key, None)
        if val is not None:
            pool_kwargs[key] = val
    cfg = LearningConfig(
        pool=PoolConfig(**pool_kwargs),
        max_cycle=args.max_cycle if args.max_cycle is not None else 5,
        max_chain=args.max_chain if args.max_chain is not None else 5,
        ndad_penalty=args.ndad_penalty if args.ndad_penalty is not None else 0.0,
        outer_iterations=args.iterations,
        seed=args.base_seed if args.base_seed is not None else 0,
        queue_window=args.queue_window,
    )
    rule = UpdateRule(args.rule, args.a)
    table = run_learning(cfg, rule)
    out = args.out or f"weights_{rule.label.lower()}.txt"
    save_weight_table(table, out)
    print(f"{rule.label}: learned table over {cfg.outer_iterations} iterations")
    print(f"wrote {out}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    result = sweep(cfg, args.axis, values)
    out = args.out or f"sweep_{args.axis}"
    written = emit_sweep(result, out, args.format or "both")
    for path in written:
        print(f"wrote {path}")
    incomplete = any(r.incomplete for r in result.reports)
    if incomplete:
        print("INCOMPLETE: some replications aborted", file=sys.stderr)
    return 1 if incomplete else 0


def _cmd_fairness(args: argparse.Namespace) -> int:
    counts = [float(v) for v in args.queue.split(",")]
    scores = welfare_scores(counts)
    print(f"utilitarian {scores.utilitarian:.5f}")
    print(f"nash        {scores.nash:.5f}")
    print(f"egalitarian {scores.egalitarian:.5f}")
    if args.baseline_queue:
        base = welfare_scores([float(v) for v in args.baseline_queue.split(",")])
        print(f"utilitarian measure {scaled_measure(scores.utilitarian, base.utilitarian):.2f}")
        print(f"nash measure        {scaled_measure(scores.nash, base.nash):.2f}")
        print(f"egalitarian measure {scaled_measure(scores.egalitarian, base.egalitarian):.2f}")
    return 0


def _cmd_export_instance(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    inst = instance_at_period(
        cfg.make_scheme(),
        cfg.pool,
        cfg.limits(),
        seed=cfg.base_seed,
        period=args.period,
        solver_timeout=cfg.solver_timeout,
    )
    text = export_instance(inst)
    if args.out:
        with open(args.out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kepsim", description="dynamic kidney exchange simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one experiment and write reports")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("learn", help="learn a weight table by repeated simulation")
    _add_common(p)
    p.add_argument("--rule", choices=["lin", "exp"], required=True)
    p.add_argument("--a", type=float, required=True, help="update rule parameter")
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--queue-window", type=int, default=1)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("sweep", help="rerun one experiment across one axis")
    _add_common(p)
    p.add_argument("--axis", choices=["W", "C", "P", "ndad_rate"], required=True)
    p.add_argument("--values", required=True, help="comma-separated, ascending")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("fairness", help="welfare scores of a queue composition")
    p.add_argument("--queue", required=True, help="five comma-separated group counts")
    p.add_argument("--baseline-queue", help="baseline counts for scaled measures")
    p.set_defaults(func=_cmd_fairness)

    p = sub.add_parser("export-instance", help="write one period's packing instance")
    _add_common(p)
    p.add_argument("--period", type=int, default=0)
    p.set_defaults(func=_cmd_export_instance)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
