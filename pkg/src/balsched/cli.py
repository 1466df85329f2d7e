"""Command-line entry point: ``balsched {gen,simulate,experiment,verify}``.

Exit codes: 0 ok, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import bal_annotations, decompose
from .core import SchedError, flow_stats, read_instance, write_instance, write_trace
from .engine import simulate
from .experiment import ConfigError, ExperimentConfig, cmd_experiment
from .policies import make_policy
from .verify import SUITES, run_suites
from .workload import (
    DEFAULT_SHAPE,
    PARETO_PAIRS,
    WorkloadConfig,
    gen_fig1,
    gen_fig2,
    gen_lb_pair,
    gen_poisson_instance,
    gen_priority_bad,
    gen_sjf_setf_lb,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
GEN_KINDS = ("poisson", "fig1", "fig2", "sjf_lb", "lb_pair", "priority_bad")


class UsageError(Exception):
    pass


class UnknownKind(UsageError):
    pass


class BadParams(UsageError):
    pass


class MissingTheta(UsageError):
    pass


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise BadParams(f"--{name.replace('_', '-')} is required for this kind")
    return value


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_gen(args) -> int:
    kind = args.kind
    if kind not in GEN_KINDS:
        raise UnknownKind(f"unknown kind {kind!r}; choose from {', '.join(GEN_KINDS)}")
    try:
        if kind == "poisson":
            if args.low is not None or args.high is not None:
                low, high = _need(args, "low"), _need(args, "high")
            else:
                low, high = PARETO_PAIRS[args.h_index - 1]
            cfg = WorkloadConfig(args.lambda_inv, args.horizon, low, high, args.shape, args.seed)
            inst = gen_poisson_instance(cfg)
        elif kind == "fig1":
            inst = gen_fig1(_need(args, "n"))
        elif kind == "fig2":
            inst = gen_fig2(_need(args, "n"))
        elif kind == "sjf_lb":
            inst = gen_sjf_setf_lb(_need(args, "n"))
        elif kind == "priority_bad":
            inst = gen_priority_bad(_need(args, "k"))
        else:
            if args.out is None:
                raise BadParams("lb_pair writes two files and needs --out")
            first, second = gen_lb_pair(_need(args, "l"))
            out = Path(args.out)
            for tag, inst in (("I1", first), ("I2", second)):
                write_instance(inst, out.with_name(f"{out.stem}_{tag}{out.suffix}"))
            return EXIT_OK
    except (ValueError, IndexError) as exc:
        raise BadParams(str(exc)) from exc
    _emit(write_instance(inst), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    inst = read_instance(args.instance)
    policy_name = args.policy.lower()
    if policy_name in ("bal", "bal_static") and args.theta is None:
        raise MissingTheta("--theta is required for bal")
    try:
        policy = make_policy(policy_name, args.theta)
    except ValueError as exc:
        raise BadParams(str(exc)) from exc
    trace = simulate(inst, policy)
    stats = flow_stats(trace)
    print(f"l1={stats.l1} l2={stats.l2:.6f} linf={stats.linf} F={stats.F}")
    report = {"policy": policy_name, "l1": stats.l1, "l2": stats.l2, "linf": stats.linf, "F": stats.F}

    rec = trace.policy_record
    if rec and rec.get("kind") == "bal":
        ann = bal_annotations(trace)
        norm_sq, starv_sq = decompose(trace, ann)
        print("job kind t_i gamma norm starv")
        jobs = []
        for j in inst:
            i = j.id
            gamma = ann.gamma.get(i)
            print(f"{i} {ann.kind(i)} {ann.t_i[i]} {gamma if gamma is not None else '-'} "
                  f"{ann.norm[i]} {ann.starv[i]}")
            jobs.append({
                "id": i, "kind": ann.kind(i), "t_i": ann.t_i[i],
                "gamma": None if gamma is None else str(gamma),
                "norm": ann.norm[i], "starv": ann.starv[i],
            })
        print(f"sum_norm_sq={norm_sq} sum_starv_sq={starv_sq}")
        report.update(jobs=jobs, sum_norm_sq=norm_sq, sum_starv_sq=starv_sq)

    if args.trace_out:
        write_trace(trace, args.trace_out)
    if args.stats_out:
        Path(args.stats_out).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def cmd_experiment_main(args) -> int:
    try:
        cfg = ExperimentConfig.read(args.config) if args.config else ExperimentConfig()
    except (ConfigError, ValueError) as exc:
        raise BadParams(f"config: {exc}") from exc
    files = cmd_experiment(cfg, args.out, workers=args.workers)
    print(f"wrote {len(files)} data files and raw.csv to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UnknownKind(f"unknown suite {args.suite!r}")
    ok = True
    for rep in run_suites(args.suite, seed=args.seed):
        print(rep.summary())
        for msg in rep.failures:
            print("  counterexample: " + msg.replace("\n", "\n    "))
        ok = ok and rep.ok
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="balsched", description="Single-machine flow-time scheduling simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance CSV")
    g.add_argument("kind", help=", ".join(GEN_KINDS))
    g.add_argument("--out", help="output path (stdout if omitted)")
    g.add_argument("--n", type=int)
    g.add_argument("--l", type=int, help="size parameter of lb_pair")
    g.add_argument("--k", type=int, help="class count of priority_bad")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--lambda-inv", type=float, default=30.0)
    g.add_argument("--horizon", type=int, default=2**16)
    g.add_argument("--h-index", type=int, default=5, choices=range(1, len(PARETO_PAIRS) + 1))
    g.add_argument("--low", type=float)
    g.add_argument("--high", type=float)
    g.add_argument("--shape", type=float, default=DEFAULT_SHAPE)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("simulate", help="run one policy on an instance")
    s.add_argument("instance")
    s.add_argument("--policy", required=True)
    s.add_argument("--theta", help="rational threshold or 'inf' (bal only)")
    s.add_argument("--trace-out")
    s.add_argument("--stats-out")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("experiment", help="run a ratio sweep and write .dat files")
    e.add_argument("--config", help="INI config (defaults if omitted)")
    e.add_argument("--out", required=True)
    e.add_argument("--workers", type=int, help="process count (default: $BALSCHED_WORKERS or 1)")
    e.set_defaults(func=cmd_experiment_main)

    v = sub.add_parser("verify", help="run property suites")
    v.add_argument("suite", nargs="?", default="all", help="oracle, majorization, maps, bal_equiv or all")
    v.add_argument("--seed", type=int, default=12345)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SchedError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
