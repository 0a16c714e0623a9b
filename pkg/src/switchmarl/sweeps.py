"""Parameter sweeps over training runs.

A sweep runs the base config once per (value, seed) pair and collects one
row per run: (value, seed, final_return, total_cl_calls, cl_call_pct).
Supported parameters:

* ``alpha`` -- coupling knob of the matrix-game environments.
* ``switching_cost`` -- the controller's per-activation cost.
* ``budget_fraction`` -- caps activations at fraction * R, where R is the
  mean total activation count of unbudgeted reference runs over the
  config's seeds (the reference runs are executed first).
"""

import csv
import os

from .harness import train
from .reporting import _cell, write_run

SWEEP_PARAMS = ("alpha", "switching_cost", "budget_fraction")
SWEEP_COLUMNS = ("value", "seed", "final_return", "total_cl_calls",
                 "cl_call_pct")


def _configure(config, parameter, value, reference_calls):
    if parameter == "alpha":
        if config.env["kind"] not in ("assurance", "nonmonotonic"):
            raise ValueError("alpha sweeps need a matrix-game env")
        return config.replace(**{"env.alpha": value})
    if parameter == "switching_cost":
        return config.replace(**{"global.switching_cost": value})
    if parameter == "budget_fraction":
        n = int(round(value * reference_calls))
        return config.replace(**{"budget.n": n})
    raise ValueError(f"unknown sweep parameter '{parameter}'")


def run_sweep(config, parameter, values, out_dir=None, keep_artifacts=False):
    """Train per value per seed; returns (rows, artifacts_by_value).

    ``artifacts_by_value`` maps value -> list of RunArtifacts and is only
    populated when ``keep_artifacts`` is set (the acceptance checks inspect
    activation histories directly).
    """
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    if parameter not in SWEEP_PARAMS:
        raise ValueError(f"unknown sweep parameter '{parameter}'")

    reference_calls = None
    if parameter == "budget_fraction":
        reference = [train(config, seed) for seed in config.seeds]
        reference_calls = (sum(r.total_cl_calls for r in reference)
                           / len(reference))
        if out_dir:
            for run in reference:
                write_run(run, os.path.join(out_dir, "reference",
                                            f"seed_{run.seed}"))

    rows = []
    artifacts_by_value = {}
    for value in values:
        run_config = _configure(config, parameter, value, reference_calls)
        for seed in config.seeds:
            run = train(run_config, seed)
            rows.append((value, seed, run.final_return, run.total_cl_calls,
                         run.cl_call_pct))
            if keep_artifacts:
                artifacts_by_value.setdefault(value, []).append(run)
            if out_dir:
                write_run(run, os.path.join(
                    out_dir, f"{parameter}_{value:g}", f"seed_{seed}"))
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_sweep_csv(os.path.join(out_dir, "results.csv"), rows)
    return rows, artifacts_by_value


def write_sweep_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def mean_by_value(rows, column):
    """Mean of one results column grouped by swept value, in value order."""
    col = SWEEP_COLUMNS.index(column)
    grouped = {}
    for row in rows:
        grouped.setdefault(row[0], []).append(row[col])
    return {value: sum(vs) / len(vs) for value, vs in sorted(grouped.items())}
