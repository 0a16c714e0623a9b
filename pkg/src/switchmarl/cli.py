"""Command-line interface.

Subcommands:

* ``train --config F --seed K --out DIR`` -- one training run.
* ``baseline-random --config F --seed K --out DIR`` -- same run with the
  switch replaced by a fair coin.
* ``sweep --config F --param P --values V1,V2,... --out DIR`` -- one run
  per (value, seed in config).
* ``oracle --mdp F --c X [--budget N]`` -- exact switching solution of a
  JSON MDP fixture, printed per state.
* ``report --runs DIR [--heatmap] [--failure-threshold X]`` -- aggregate
  curves (and optionally merged heatmaps / failure rate) over the run
  directories found directly under DIR.

Exit codes: 0 success, 1 usage or configuration error, 2 invariant
violation (an activation budget breach, which indicates a bug).
"""

import argparse
import json
import os
import sys

import numpy as np

from . import oracle as oracle_mod
from .config import load_config
from .harness import BudgetViolation, train
from .reporting import (aggregate, failure_rate, read_heatmap_csv,
                        read_metrics_csv, write_aggregate_csv,
                        write_heatmap_csv, write_run)
from .sweeps import run_sweep


def _build_parser():
    parser = argparse.ArgumentParser(prog="switchmarl")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("train", "baseline-random"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", required=True, type=int)
        p.add_argument("--out", required=True)

    p = sub.add_parser("sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated numeric values")
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle")
    p.add_argument("--mdp", required=True)
    p.add_argument("--c", required=True, type=float)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=1e-9)

    p = sub.add_parser("report")
    p.add_argument("--runs", required=True)
    p.add_argument("--heatmap", action="store_true")
    p.add_argument("--failure-threshold", type=float, default=None)
    return parser


def _cmd_train(args, mode=None):
    config = load_config(args.config)
    run = train(config, args.seed, mode=mode)
    write_run(run, args.out)
    print(f"run complete: final return {run.final_return!r}, "
          f"{run.total_cl_calls} CL calls "
          f"({run.cl_call_pct:.2f}%), artifacts in {args.out}")


def _cmd_sweep(args):
    config = load_config(args.config)
    values = [float(v) for v in args.values.split(",") if v != ""]
    rows, _ = run_sweep(config, args.param, values, out_dir=args.out)
    print(f"sweep complete: {len(rows)} runs, results in "
          f"{os.path.join(args.out, 'results.csv')}")


def _cmd_oracle(args):
    mdp, central = oracle_mod.load_mdp(args.mdp)
    if args.budget is None:
        sol = oracle_mod.solve_switching(mdp, central, args.c,
                                         tolerance=args.tolerance)
        print("state value best_direct activate_value activate")
        for s in range(mdp.state_count):
            direct = sol.q_values[s, :-1]
            print(f"{s} {float(sol.values[s])!r} {int(np.argmax(direct))} "
                  f"{float(sol.q_values[s, -1])!r} {int(sol.activation_set[s])}")
    else:
        sol = oracle_mod.solve_budgeted(mdp, central, args.c, args.budget,
                                        tolerance=args.tolerance)
        print("state remaining value activate")
        for s in range(mdp.state_count):
            for x in range(args.budget + 1):
                print(f"{s} {x} {float(sol.values[s, x])!r} "
                      f"{int(sol.activation_set[s, x])}")
    print(f"# converged in {sol.iterations} iterations, "
          f"residual {float(sol.residual)!r}")


def _run_dirs(root):
    dirs = []
    for name in sorted(os.listdir(root)):
        path = os.path.join(root, name)
        if os.path.isfile(os.path.join(path, "metrics.csv")):
            dirs.append(path)
    if not dirs:
        raise ValueError(f"no run directories with metrics.csv under {root}")
    return dirs


def _cmd_report(args):
    dirs = _run_dirs(args.runs)
    metrics = [read_metrics_csv(os.path.join(d, "metrics.csv")) for d in dirs]
    rows = aggregate([[(r["step"], r["episode"], r["seed"], r["eval_return"])
                       for r in m] for m in metrics])
    out_path = os.path.join(args.runs, "aggregate.csv")
    write_aggregate_csv(out_path, rows)
    print(f"aggregated {len(dirs)} runs into {out_path}")

    if args.heatmap:
        merged = {}
        for d in dirs:
            for row in read_heatmap_csv(os.path.join(d, "heatmap.csv")):
                key = (row["state_key"], row["x"], row["y"])
                acc = merged.setdefault(key, [0, 0])
                acc[0] += row["activations"]
                acc[1] += row["visits"]
        heat_rows = [(k[0], k[1], k[2], a, v, (a / v if v else 0.0))
                     for k, (a, v) in merged.items()]
        heat_path = os.path.join(args.runs, "heatmap.csv")
        write_heatmap_csv(heat_path, heat_rows)
        print(f"merged heatmap in {heat_path}")

    if args.failure_threshold is not None:
        scores = []
        for d in dirs:
            with open(os.path.join(d, "summary.json")) as fh:
                scores.append(json.load(fh)["normalized_final_return"])
        rate = failure_rate(scores, args.failure_threshold)
        print(f"failure rate at threshold {args.failure_threshold}: "
              f"{rate:.3f} ({sum(s < args.failure_threshold for s in scores)}"
              f"/{len(scores)})")


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "train":
            _cmd_train(args)
        elif args.command == "baseline-random":
            _cmd_train(args, mode="random")
        elif args.command == "sweep":
            _cmd_sweep(args)
        elif args.command == "oracle":
            _cmd_oracle(args)
        elif args.command == "report":
            _cmd_report(args)
    except BudgetViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
