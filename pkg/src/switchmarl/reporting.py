"""Run artifacts on disk: metrics CSV, heatmaps, table dumps, aggregation.

Files written per run directory:

* ``metrics.csv`` -- one row per evaluation, columns (exact order):
  step, episode, seed, eval_return, cl_calls_cum, cl_call_pct,
  budget_remaining, epsilon, temperature. ``budget_remaining`` is empty
  outside budget mode. Floats are written with ``repr`` so a re-run of the
  same (config, seed) reproduces the file byte for byte.
* ``heatmap.csv`` -- per visited global state, columns state_key, x, y,
  activations, visits, rate (rate 0 when visits are 0), in first-visit
  order.
* ``config.json`` -- the exact config dict plus the seed and mode.
* ``tables.txt`` -- every learned value as one tab-separated line
  ``table<TAB>owner<TAB>key<TAB>column<TAB>value`` for inspection.
* ``summary.json`` -- final return, activation totals, episode count.
"""

import csv
import json
import math
import os

METRICS_COLUMNS = ("step", "episode", "seed", "eval_return", "cl_calls_cum",
                   "cl_call_pct", "budget_remaining", "epsilon", "temperature")
HEATMAP_COLUMNS = ("state_key", "x", "y", "activations", "visits", "rate")


def _cell(value):
    if isinstance(value, float):
        return repr(float(value))
    return value


def write_metrics_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def read_metrics_csv(path):
    """Rows as dicts with numeric fields parsed back."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append({
                "step": int(row["step"]),
                "episode": int(row["episode"]),
                "seed": int(row["seed"]),
                "eval_return": float(row["eval_return"]),
                "cl_calls_cum": int(row["cl_calls_cum"]),
                "cl_call_pct": float(row["cl_call_pct"]),
                "budget_remaining": int(row["budget_remaining"])
                if row["budget_remaining"] != "" else None,
                "epsilon": float(row["epsilon"]),
                "temperature": float(row["temperature"]),
            })
    return out


def heatmap_rows(artifacts):
    """Per-state (state_key, x, y, activations, visits, rate) tuples."""
    rows = []
    for state, visits in artifacts.visit_counts.items():
        acts = artifacts.activation_counts.get(state, 0)
        x, y = artifacts.focal[state]
        rate = acts / visits if visits else 0.0
        rows.append((repr(state), x, y, acts, visits, rate))
    return rows


def write_heatmap_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEATMAP_COLUMNS)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def read_heatmap_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "state_key": row["state_key"],
                "x": int(row["x"]),
                "y": int(row["y"]),
                "activations": int(row["activations"]),
                "visits": int(row["visits"]),
                "rate": float(row["rate"]),
            })
    return rows


def dump_tables(path, artifacts):
    """Flat text dump of every learned table.

    Line format: table name, owner (agent index or '-'), key, column
    (action index, agent index for mixer weights, or g), value repr,
    tab-separated.
    """
    with open(path, "w") as fh:
        iql = artifacts.iql
        for agent, index in enumerate(iql.obs_index):
            table = iql.tables[agent]
            for key, row_idx in index.items():
                for a in range(iql.action_counts[agent]):
                    fh.write(f"iql\t{agent}\t{key!r}\t{a}\t"
                             f"{float(table.data[row_idx, a])!r}\n")
        central = artifacts.central
        for key, s in central.state_index.items():
            for agent in range(central.n_agents):
                for a in range(central.action_counts[agent]):
                    fh.write(f"central_utility\t{agent}\t{key!r}\t{a}\t"
                             f"{float(central.utilities.data[agent, s, a])!r}\n")
            for agent in range(central.n_agents):
                fh.write(f"central_weight\t{agent}\t{key!r}\t{agent}\t"
                         f"{float(central.weights.data[s, agent])!r}\n")
            fh.write(f"central_bias\t-\t{key!r}\t0\t{float(central.bias.data[s, 0])!r}\n")
        glob = artifacts.global_q
        for key, k in glob.key_index.items():
            for g in (0, 1):
                fh.write(f"global\t-\t{key!r}\t{g}\t{float(glob.table.data[k, g])!r}\n")


def summarize(artifacts):
    return {
        "seed": artifacts.seed,
        "mode": artifacts.mode,
        "env": artifacts.config.env,
        "total_steps": int(len(artifacts.g_history)),
        "episodes": artifacts.episodes,
        "final_return": artifacts.final_return,
        "max_return": artifacts.max_return,
        "normalized_final_return": artifacts.normalized_final_return,
        "total_cl_calls": artifacts.total_cl_calls,
        "cl_call_pct": artifacts.cl_call_pct,
        "budget_n": artifacts.config.budget_n,
    }


def write_run(artifacts, out_dir):
    """Write the full artifact set for one run into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    write_metrics_csv(os.path.join(out_dir, "metrics.csv"), artifacts.metrics)
    write_heatmap_csv(os.path.join(out_dir, "heatmap.csv"),
                      heatmap_rows(artifacts))
    dump_tables(os.path.join(out_dir, "tables.txt"), artifacts)
    with open(os.path.join(out_dir, "config.json"), "w") as fh:
        json.dump({"config": artifacts.config.to_dict(),
                   "seed": artifacts.seed, "mode": artifacts.mode}, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summarize(artifacts), fh, indent=2)
        fh.write("\n")
    return out_dir


def aggregate(metrics_per_run):
    """Mean and 95% confidence interval per evaluation step across runs.

    Input: one metrics row list per run (>= 2 runs) with identical step
    grids. Output rows: (step, k, mean, ci_halfwidth) with the interval
    mean +/- 1.96 * sample std / sqrt(k).
    """
    if len(metrics_per_run) < 2:
        raise ValueError("aggregation needs at least 2 runs")
    step_grids = [[row[0] for row in rows] for rows in metrics_per_run]
    if any(grid != step_grids[0] for grid in step_grids[1:]):
        raise ValueError("runs have misaligned evaluation steps")
    out = []
    k = len(metrics_per_run)
    for i, step in enumerate(step_grids[0]):
        values = [rows[i][3] for rows in metrics_per_run]
        mean = sum(values) / k
        if all(v == values[0] for v in values):
            out.append((step, k, values[0], 0.0))
            continue
        var = sum((v - mean) ** 2 for v in values) / (k - 1)
        half = 1.96 * math.sqrt(var) / math.sqrt(k)
        out.append((step, k, mean, half))
    return out


def write_aggregate_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("step", "k", "mean_return", "ci_halfwidth",
                         "ci_low", "ci_high"))
        for step, k, mean, half in rows:
            writer.writerow([step, k, _cell(mean), _cell(half),
                             _cell(mean - half), _cell(mean + half)])


def failure_rate(final_scores, threshold):
    """Fraction of tasks whose mean final score falls below ``threshold``."""
    scores = list(final_scores)
    if not scores:
        raise ValueError("failure_rate needs at least one score")
    return sum(1 for s in scores if s < threshold) / len(scores)
