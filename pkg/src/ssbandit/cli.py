"""Command line entry point: ``ssbandit run | verify | bounds | list-scenarios``."""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import theory
from .config import ConfigError, load_scenario, make_policy
from .harness import format_table, lower_bound, run_experiment, write_csv
from .presets import PRESETS, get_preset


def _scenario(ref: str):
    if ref in PRESETS:
        return get_preset(ref)
    if os.path.exists(ref):
        return load_scenario(ref)
    raise ConfigError(f"{ref!r} is neither a preset nor a config file (see list-scenarios)")


def cmd_run(args) -> int:
    sc = _scenario(args.scenario)
    changes = {}
    if args.N:
        changes["horizons"] = tuple(args.N)
    if args.J is not None:
        changes["replications"] = args.J
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.policies:
        roster = {}
        for label in args.policies:
            roster[label] = sc.policies[label] if label in sc.policies else make_policy(label)
        changes["policies"] = roster
    if changes:
        sc = sc.with_(**changes)
    summaries = [run_experiment(sc, N, n_jobs=args.n_jobs, engine=args.engine) for N in sc.horizons]
    print(format_table(summaries), end="")
    if args.out:
        write_csv(summaries, args.out)
        print(f"wrote {args.out}")
    return 0


def _write_report(report, path):
    cols = report.columns()
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in report.rows:
            w.writerow({k: (str(v) if not isinstance(v, float) else repr(v)) for k, v in row.items()})


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.check == "ctj":
        reports = [theory.verify_ctj_inequality(args.t_max)]
    elif args.check == "b2":
        reports = [theory.verify_b2_bound(t, d, args.z) for t in args.t for d in args.delta]
    elif args.check == "min1":
        reports = [theory.verify_min1_asymptotic(args.n, args.n2, args.replications, rng)]
    else:
        reports = [theory.verify_chisq_chernoff(t, replications=args.replications, rng=rng) for t in args.t]
    for rep in reports:
        print(rep)
        if args.check in ("b2", "chernoff"):
            for row in rep.rows:
                print("  " + "  ".join(f"{k}={_short(v)}" for k, v in row.items()))
    if args.csv:
        merged = theory.VerificationReport(args.check, all(r.passed for r in reports),
                                           [row for r in reports for row in r.rows])
        _write_report(merged, args.csv)
        print(f"wrote {args.csv}")
    return 0 if all(r.passed for r in reports) else 1


def _short(v):
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def cmd_bounds(args) -> int:
    sc = _scenario(args.scenario)
    if sc.sampled:
        print(f"{sc.name}: arms are drawn per replication; bounds need fixed arms", file=sys.stderr)
        return 2
    horizons = args.N or sc.horizons
    try:
        reports = [lower_bound(sc.arms, N) for N in horizons]
    except ValueError as exc:
        print(f"{sc.name}: {exc}", file=sys.stderr)
        return 2
    rep = reports[0]
    best = max(m.mean for m in sc.arms)
    print(f"{sc.name}: asymptotic lower bound")
    print(f"{'arm':>4} {'mean':>10} {'gap':>10} {'information':>12} {'1/info':>10} {'gap/info':>10}")
    for k, m in enumerate(sc.arms):
        info = rep.information[k]
        print(f"{k:>4} {m.mean:>10.6g} {best - m.mean:>10.6g} {info:>12.6g} "
              f"{rep.limits[k]:>10.6g} {rep.coefficients[k]:>10.6g}")
    for r in reports:
        print(f"N={r.horizon}: bound = {r.coefficient_sum:.6g} * log N = {r.bound:.6g}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["scenario", "N", "arm", "mean", "information", "limit", "coefficient", "bound"])
            for r in reports:
                for k, m in enumerate(sc.arms):
                    w.writerow([sc.name, r.horizon, k, repr(m.mean), repr(r.information[k]),
                                repr(r.limits[k]), repr(r.coefficients[k]), repr(r.bound)])
        print(f"wrote {args.csv}")
    return 0


def cmd_list(args) -> int:
    width = max(len(n) for n in PRESETS)
    for name in PRESETS:
        sc = get_preset(name)
        Ns = ",".join(str(n) for n in sc.horizons)
        print(f"{name:<{width}}  K={sc.n_arms:<2} N={Ns:<16} {sc.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ssbandit", description="Subsample-comparison bandit experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a preset scenario or a TOML config")
    r.add_argument("scenario", help="preset name or path to a .toml file")
    r.add_argument("--policies", nargs="+", help="labels from the scenario roster or policy type names")
    r.add_argument("--N", nargs="+", type=int, help="horizons (default: the scenario's)")
    r.add_argument("--J", type=int, help="replications")
    r.add_argument("--seed", type=int, help="master seed")
    r.add_argument("--out", help="CSV output path")
    r.add_argument("--n-jobs", type=int, default=1, help="worker processes (-1: all CPUs)")
    r.add_argument("--engine", choices=("numba", "python"), default="numba")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="numeric checks of supporting inequalities")
    v.add_argument("check", choices=("ctj", "b2", "min1", "chernoff"))
    v.add_argument("--t-max", type=int, default=50, help="ctj: largest t")
    v.add_argument("--t", type=int, nargs="+", default=None, help="b2: t values (default 1..10); chernoff: sample sizes")
    v.add_argument("--delta", type=float, nargs="+", default=[0.5, 1.0], help="b2: shifts")
    v.add_argument("--z", type=float, nargs="+", default=[0.0, 1.0, 5.0], help="b2: thresholds")
    v.add_argument("--n", type=int, default=10**6, help="min1: total sample size")
    v.add_argument("--n2", type=int, default=None, help="min1: window length (default ceil(2 log n))")
    v.add_argument("--replications", type=int, default=None)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--csv", help="write the per-point rows as CSV")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bounds", help="asymptotic regret lower bound of a fixed-arm scenario")
    b.add_argument("scenario")
    b.add_argument("--N", nargs="+", type=int)
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bounds)

    ls = sub.add_parser("list-scenarios", help="list the named presets")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) == "verify":
        if args.t is None:
            args.t = list(range(1, 11)) if args.check == "b2" else [11]
        if args.replications is None:
            args.replications = 200 if args.check == "min1" else 20000
    try:
        return args.func(args)
    except (ConfigError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
