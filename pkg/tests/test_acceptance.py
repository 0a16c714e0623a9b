"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Training-based criteria share session-scoped runs. Every run is fully
deterministic in (config, seed), so pass/fail outcomes reproduce exactly
on a given platform. Criterion 6's absolute-return clause is asserted as
specified even though independent tabular learners cannot reach it on the
pinned 5x5 task within the pinned step budget (the relative clause holds);
it is the one expected red in the suite.
"""

import time

import numpy as np
import pytest
import scipy.stats

from switchmarl.config import parse_config
from switchmarl.harness import train
from switchmarl.oracle import (bellman_backup, brute_force_switching,
                               optimal_values, random_mdp,
                               simulate_budgeted_activations, solve_budgeted,
                               solve_switching)

SEEDS = (0, 1, 2)
ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)


def report(criterion, passed, detail):
    line = f"ACCEPTANCE {criterion} {'PASS' if passed else 'FAIL'}: {detail}"
    print(line)
    return passed


# ---------------------------------------------------------------- configs

def matrix_config(kind, alpha, mode="learned"):
    return parse_config({
        "env": {"kind": kind, "alpha": alpha},
        "learners": {"lr": 0.2, "central_lr": 0.05,
                     "epsilon": {"start": 1.0, "end": 0.05,
                                 "decay_steps": 10000}},
        "global": {"switching_cost": 0.05, "lr": 0.5, "mode": mode,
                   "temperature": {"start": 1.0, "end": 0.002,
                                    "decay_steps": 10000}},
        "schedule": {"total_steps": 20000, "eval_period": 20000,
                     "warmup_steps": 500, "eval_episodes": 5,
                     "seeds": list(SEEDS), "buffer_capacity": 2000},
    })


def lbf5_config(mode):
    """The pinned 5x5 two-player one-food coop task (criterion 6)."""
    return parse_config({
        "env": {"kind": "foraging", "width": 5, "height": 5, "n_players": 2,
                "n_foods": 1, "max_player_level": 1, "coop": True,
                "sight": 2, "episode_limit": 25, "discount": 0.95},
        "learners": {"lr": 0.3, "central_lr": 0.3,
                     "epsilon": {"start": 1.0, "end": 0.1,
                                 "decay_steps": 50000}},
        "global": {"switching_cost": 0.01, "lr": 0.5, "mode": mode,
                   "temperature": {"start": 1.0, "end": 0.002,
                                    "decay_steps": 75000}},
        "schedule": {"total_steps": 100000, "eval_period": 20000,
                     "warmup_steps": 1000, "eval_episodes": 40,
                     "seeds": list(SEEDS), "buffer_capacity": 10000,
                     "batch_size": 128},
    })


def coop_config(mode="learned", coop=True, episode_limit=8, cost=0.01,
                budget=None):
    """The coop/weak map pair for criteria 7 and 9-11.

    A tight episode limit makes the coordination bottleneck binding: the
    purely independent system cannot reliably finish in time while the
    centralized learner can, so switch decisions carry real value.
    """
    return parse_config({
        "env": {"kind": "foraging", "width": 3, "height": 3, "n_players": 2,
                "n_foods": 1, "max_player_level": 1, "coop": coop,
                "sight": 2, "episode_limit": episode_limit, "discount": 0.95},
        "learners": {"lr": 0.3, "central_lr": 0.3,
                     "epsilon": {"start": 1.0, "end": 0.1,
                                 "decay_steps": 75000}},
        "global": {"switching_cost": cost, "lr": 0.5, "mode": mode,
                   "temperature": {"start": 1.0, "end": 0.002,
                                    "decay_steps": 112500}},
        "schedule": {"total_steps": 150000, "eval_period": 30000,
                     "warmup_steps": 1000, "eval_episodes": 40,
                     "seeds": list(SEEDS), "buffer_capacity": 10000,
                     "batch_size": 128},
        "budget": {"n": budget, "buckets": 2},
    })


def junction_config():
    return parse_config({
        "env": {"kind": "junction", "arm_length": 4, "episode_limit": 30,
                "discount": 0.95},
        "learners": {"lr": 0.3, "central_lr": 0.3,
                     "epsilon": {"start": 1.0, "end": 0.05,
                                 "decay_steps": 40000}},
        "global": {"switching_cost": 0.01, "lr": 0.5,
                   "temperature": {"start": 1.0, "end": 0.002,
                                    "decay_steps": 60000}},
        "schedule": {"total_steps": 80000, "eval_period": 16000,
                     "warmup_steps": 1000, "eval_episodes": 20,
                     "seeds": list(SEEDS), "buffer_capacity": 10000,
                     "batch_size": 128},
    })


# ----------------------------------------------------------- shared runs

@pytest.fixture(scope="session")
def coop_runs():
    return [train(coop_config(), s) for s in SEEDS]


@pytest.fixture(scope="session")
def weak_runs():
    return [train(coop_config(coop=False), s) for s in SEEDS]


def mean_final(runs):
    return float(np.mean([r.final_return for r in runs]))


# -------------------------------------------------- 1. operator contraction

def test_criterion_01_contraction():
    start = time.monotonic()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        gamma = float(rng.choice([0.5, 0.9, 0.99]))
        n_s = int(rng.integers(2, 7))
        n_a = int(rng.integers(2, 9))
        mdp = random_mdp(rng, n_s, n_a, gamma,
                         terminal_states=int(rng.integers(0, 2)))
        central = rng.integers(0, n_a, size=n_s)
        c = float(rng.choice([0.0, 0.01, 0.5]))
        v1 = rng.normal(scale=5, size=n_s)
        v2 = rng.normal(scale=5, size=n_s)
        lhs = np.abs(bellman_backup(v1, mdp, central, c)
                     - bellman_backup(v2, mdp, central, c)).max()
        bound = gamma * np.abs(v1 - v2).max() + 1e-12
        worst = max(worst, float(lhs - bound))
        assert lhs <= bound
    elapsed = time.monotonic() - start
    ok = elapsed < 5.0
    assert report(1, ok, f"1000 operator applications contract "
                         f"(worst margin {worst:.2e}, {elapsed:.2f}s < 5s)")


# --------------------------------------- 2. oracle fixed-point equivalence

def oracle_fixtures():
    rng = np.random.default_rng(77)
    for _ in range(50):
        n_s = int(rng.integers(2, 5))
        mdp = random_mdp(rng, n_s, 4, float(rng.choice([0.5, 0.9, 0.95])),
                         terminal_states=int(rng.integers(0, 2)))
        central = rng.integers(0, 4, size=n_s)
        yield mdp, central


def test_criterion_02_oracle_equivalence():
    start = time.monotonic()
    checked = 0
    for mdp, central in oracle_fixtures():
        for c in (0.0, 0.01, 0.5):
            sol = solve_switching(mdp, central, c, tolerance=1e-8)
            values, policy = brute_force_switching(mdp, central, c)
            np.testing.assert_allclose(sol.values, values, atol=1e-6)
            np.testing.assert_array_equal(sol.activation_set,
                                          policy == mdp.action_count)
            checked += 1
    elapsed = time.monotonic() - start
    ok = elapsed < 60.0
    assert report(2, ok, f"{checked} fixtures: value iteration matches "
                         f"enumeration within 1e-6 and activation sets agree "
                         f"({elapsed:.1f}s < 60s)")


# ----------------------------------------------------- 3. budget DP oracle

def test_criterion_03_budget_dp():
    rng = np.random.default_rng(99)
    violations = 0
    for i, (mdp, central) in enumerate(oracle_fixtures()):
        c = (0.0, 0.01, 0.5)[i % 3]
        sol = solve_budgeted(mdp, central, c, n=5, tolerance=1e-10)
        assert (np.diff(sol.values, axis=1) >= -1e-9).all()
        plain = optimal_values(mdp, tolerance=1e-10)
        zero = solve_budgeted(mdp, central, c, n=0, tolerance=1e-10)
        np.testing.assert_allclose(zero.values[:, 0], plain, atol=1e-9)
        unconstrained = solve_switching(mdp, central, c, tolerance=1e-10)
        np.testing.assert_allclose(sol.values[:, 5], unconstrained.values,
                                   atol=1e-8)
        for n in (1, 3):
            sol_n = solve_budgeted(mdp, central, c, n=n)
            used = simulate_budgeted_activations(
                mdp, central, sol_n, n, n_rollouts=10_000, horizon=60,
                rng=rng)
            violations += int((used > n).sum())
    assert violations == 0
    assert report(3, True, "budgeted values monotone in n, n=0 equals the "
                           "plain optimum, large n equals unconstrained; "
                           "0 budget violations across rollouts")


# ------------------------------------------- 4. coordination-game call trend

@pytest.fixture(scope="session")
def assurance_sweep():
    return {alpha: [train(matrix_config("assurance", alpha), s) for s in SEEDS]
            for alpha in ALPHAS}


def test_criterion_04_assurance_call_trend(assurance_sweep):
    means = [float(np.mean([r.total_cl_calls for r in assurance_sweep[a]]))
             for a in ALPHAS]
    rho = scipy.stats.spearmanr(ALPHAS, means).statistic
    ok = means[-1] < means[0] and rho <= -0.8
    assert report(4, ok, f"mean CL calls per alpha {[int(m) for m in means]}, "
                         f"spearman {rho:.2f} <= -0.8 and "
                         f"alpha=1 < alpha=0")


# ------------------------------ 5. non-additive game trend and final quality

def test_criterion_05_nonmonotonic_trend_and_quality():
    sweep = {alpha: [train(matrix_config("nonmonotonic", alpha), s)
                     for s in SEEDS] for alpha in (0.0, 0.25, 0.5, 0.75, 1.0)}
    means = [float(np.mean([r.total_cl_calls for r in sweep[a]]))
             for a in ALPHAS]
    finals = [r.final_return for r in sweep[1.0]]
    il_only = [train(matrix_config("nonmonotonic", 1.0, "never"), s).final_return
               for s in SEEDS]
    cl_only = [train(matrix_config("nonmonotonic", 1.0, "always"), s).final_return
               for s in SEEDS]
    near_optimal = sum(abs(f - 8.0) <= 0.5 for f in finals)
    baseline = max(np.mean(il_only), np.mean(cl_only))
    ok = (means[0] > means[-1] and near_optimal >= 2
          and np.mean(finals) >= baseline - 0.5)
    assert report(5, ok, f"calls {[int(m) for m in means]} decrease 0->1, "
                         f"alpha=1 returns {finals} hit 8+/-0.5 on "
                         f"{near_optimal}/3 seeds, mean {np.mean(finals):.2f} "
                         f">= max(IL {np.mean(il_only):.2f}, "
                         f"CL {np.mean(cl_only):.2f}) - 0.5")


# ------------------------------------------------ 6. improvement over IL

def test_criterion_06_improvement_over_il():
    """Pinned 5x5 coop task, 100k steps.

    The relative clause (switching >= independent-only - 0.05) holds. The
    absolute clause (mean normalized return >= 0.8) is asserted as stated
    and is expected red: with zero-initialized tabular learners on the
    spec-pinned injective window observations, the task's joint-load
    coordination signal fragments over thousands of observation keys and
    no configuration reaches 0.8 within 100k steps (see the decisions
    ledger for the blocking analysis and scaling evidence).
    """
    switching = [train(lbf5_config("learned"), s) for s in SEEDS]
    il_only = [train(lbf5_config("never"), s) for s in SEEDS]
    sw_mean, il_mean = mean_final(switching), mean_final(il_only)
    clause_a = sw_mean >= il_mean - 0.05
    clause_b = sw_mean >= 0.8
    report(6, clause_a and clause_b,
           f"switching mean {sw_mean:.3f} vs IL-only {il_mean:.3f} "
           f"(relative clause {'ok' if clause_a else 'violated'}); "
           f"absolute threshold 0.8 {'met' if clause_b else 'NOT met'}")
    assert clause_a
    assert clause_b


# ------------------------------------------ 7. CL thrift across coupling

def test_criterion_07_cl_thrift_across_coupling(coop_runs, weak_runs):
    coop_pct = float(np.mean([r.cl_call_pct for r in coop_runs]))
    weak_pct = float(np.mean([r.cl_call_pct for r in weak_runs]))
    ok = weak_pct < coop_pct
    assert report(7, ok, f"CL call {weak_pct:.1f}% on the weak-coupling map "
                         f"< {coop_pct:.1f}% on the matched coop map")


# --------------------------------------------- 8. junction call locality

def test_criterion_08_junction_locality():
    details = []
    ok = True
    for s in SEEDS:
        run = train(junction_config(), s)
        near, far = [], []
        for state, visits in run.visit_counts.items():
            x, y = run.focal[state]
            rate = run.activation_counts.get(state, 0) / visits
            d = max(abs(x), abs(y))
            if d <= 1:
                near.append(rate)
            elif d >= 3:
                far.append(rate)
        near_m, far_m = float(np.mean(near)), float(np.mean(far))
        details.append(f"seed {s}: {near_m:.2f} vs {far_m:.2f}")
        ok = ok and near_m > far_m
    assert report(8, ok, "activation rate near the intersection exceeds the "
                         "far rate per seed (" + "; ".join(details) + ")")


# ------------------------------------------------------- 9. budget sweep

def budget_config(budget=None):
    """Harsher coop variant for the budget sweep: at episode limit 5 the
    centralized learner is close to necessary, so capping its activations
    has a real effect to measure."""
    return parse_config({
        "env": {"kind": "foraging", "width": 3, "height": 3, "n_players": 2,
                "n_foods": 1, "max_player_level": 1, "coop": True,
                "sight": 2, "episode_limit": 5, "discount": 0.95},
        "learners": {"lr": 0.3, "central_lr": 0.3,
                     "epsilon": {"start": 1.0, "end": 0.1,
                                 "decay_steps": 75000}},
        "global": {"switching_cost": 0.01, "lr": 0.5,
                   "temperature": {"start": 1.0, "end": 0.002,
                                    "decay_steps": 112500}},
        "schedule": {"total_steps": 150000, "eval_period": 30000,
                     "warmup_steps": 1000, "eval_episodes": 80,
                     "seeds": list(SEEDS), "buffer_capacity": 10000,
                     "batch_size": 128},
        "budget": {"n": budget, "buckets": 2},
    })


def test_criterion_09_budget_sweep():
    reference_runs = [train(budget_config(), s) for s in SEEDS]
    reference = float(np.mean([r.total_cl_calls for r in reference_runs]))
    means, halves = [], []
    for fraction in (0.10, 0.25, 0.50, 0.75, 1.00):
        n = int(round(fraction * reference))
        runs = [train(budget_config(budget=n), s) for s in SEEDS]
        for run in runs:
            assert run.total_cl_calls <= n
            assert (np.cumsum(run.g_history) <= n).all()
        finals = [r.final_return for r in runs]
        means.append(float(np.mean(finals)))
        halves.append(1.96 * float(np.std(finals, ddof=1)) / np.sqrt(len(SEEDS)))
    monotone = all(means[i + 1] >= means[i] - (halves[i] + halves[i + 1])
                   for i in range(len(means) - 1))
    assert report(9, monotone,
                  f"returns per budget fraction "
                  f"{[round(m, 3) for m in means]} non-decreasing up to CI "
                  f"overlap; no run exceeded its budget "
                  f"(reference {int(reference)} calls)")


# ------------------------------------------- 10. switching-cost robustness

def test_criterion_10_cost_robustness():
    means = {}
    for cost in (0.005, 0.01, 0.02, 0.05):
        runs = [train(coop_config(episode_limit=20, cost=cost), s)
                for s in SEEDS]
        means[cost] = mean_final(runs)
    spread_ok = (max(means.values()) - min(means.values())) \
        <= 0.10 * max(means.values())
    tiny = [train(coop_config(episode_limit=20, cost=0.0001), s).total_cl_calls
            for s in SEEDS]
    ref = [train(coop_config(episode_limit=20, cost=0.01), s).total_cl_calls
           for s in SEEDS]
    more_calls = float(np.mean(tiny)) > float(np.mean(ref))
    ok = spread_ok and more_calls
    assert report(10, ok,
                  f"returns across costs {({c: round(m, 3) for c, m in means.items()})} "
                  f"within 10%; cost 1e-4 makes {int(np.mean(tiny))} calls > "
                  f"{int(np.mean(ref))} at 1e-2")


# -------------------------------------------- 11. learned vs random switch

def test_criterion_11_learned_vs_random(coop_runs):
    random_runs = [train(coop_config(mode="random"), s) for s in SEEDS]
    learned, coin = mean_final(coop_runs), mean_final(random_runs)
    ok = learned >= coin
    assert report(11, ok, f"learned switching {learned:.3f} >= "
                          f"fair-coin switching {coin:.3f}")


# -------------------------------------- 12. determinism and bookkeeping

def test_criterion_12_determinism_and_bookkeeping(tmp_path):
    from switchmarl.reporting import write_metrics_csv

    small_budgeted = parse_config({
        "env": {"kind": "foraging", "width": 3, "height": 3, "n_players": 2,
                "n_foods": 1, "max_player_level": 1, "coop": True,
                "sight": 2, "episode_limit": 8, "discount": 0.95},
        "schedule": {"total_steps": 8000, "eval_period": 2000,
                     "warmup_steps": 500, "eval_episodes": 10,
                     "seeds": list(SEEDS), "batch_size": 64},
        "budget": {"n": 500},
    })
    configs = [
        matrix_config("assurance", 0.5),
        small_budgeted,
    ]
    payloads = []
    for i, config in enumerate(configs):
        blobs = []
        for attempt in range(2):
            run = train(config, 3)
            path = tmp_path / f"m{i}_{attempt}.csv"
            write_metrics_csv(path, run.metrics)
            blobs.append(path.read_bytes())
            for row in run.metrics:
                assert row[4] == int(run.g_history[:row[0]].sum())
        payloads.append(blobs[0] == blobs[1])
    ok = all(payloads)
    assert report(12, ok, "re-running each (config, seed) reproduced the "
                          "metrics CSV byte for byte; cumulative CL calls "
                          "match the stored decision history at every "
                          "evaluation step")
