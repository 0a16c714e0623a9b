#!/usr/bin/env python3
"""Throughput comparison: compiled update kernels vs pure-Python fallback.

Times the three batch kernels on synthetic data and a full training run on
the small coop foraging map, in whichever lane this process imported.
Run it twice to get both sides:

    python benchmarks/bench_kernels.py
    SWITCHMARL_PURE_PYTHON=1 python benchmarks/bench_kernels.py

The two lanes are bit-identical in results (tests/test_kernels.py); this
script only measures speed.
"""

import time

import numpy as np

from switchmarl import kernels
from switchmarl.config import parse_config
from switchmarl.harness import train


def bench_td(n_batches=2000, rows=512, n_actions=6, batch=128):
    rng = np.random.default_rng(0)
    q = rng.normal(size=(rows, n_actions))
    keys = rng.integers(0, rows, size=(n_batches, batch))
    actions = rng.integers(0, n_actions, size=(n_batches, batch))
    rewards = rng.normal(size=(n_batches, batch))
    next_keys = rng.integers(0, rows, size=(n_batches, batch))
    terminals = rng.integers(0, 2, size=(n_batches, batch)).astype(np.uint8)
    start = time.perf_counter()
    for i in range(n_batches):
        kernels.td_update(q, keys[i], actions[i], rewards[i], next_keys[i],
                          terminals[i], 0.3, 0.95)
    return n_batches * batch / (time.perf_counter() - start)


def bench_switch(n_batches=2000, rows=512, batch=128):
    rng = np.random.default_rng(1)
    q = rng.normal(size=(rows, 2))
    keys = rng.integers(0, rows, size=(n_batches, batch))
    gs = rng.integers(0, 2, size=(n_batches, batch))
    rewards = rng.normal(size=(n_batches, batch))
    next_keys = rng.integers(0, rows, size=(n_batches, batch))
    allow = rng.integers(0, 2, size=(n_batches, batch)).astype(np.uint8)
    terminals = rng.integers(0, 2, size=(n_batches, batch)).astype(np.uint8)
    start = time.perf_counter()
    for i in range(n_batches):
        kernels.switch_update(q, keys[i], gs[i], rewards[i], next_keys[i],
                              allow[i], terminals[i], 0.5, 0.95, 0.01)
    return n_batches * batch / (time.perf_counter() - start)


def bench_mix(n_batches=2000, rows=512, n_agents=2, n_actions=6, batch=128):
    rng = np.random.default_rng(2)
    counts = np.full(n_agents, n_actions, dtype=np.int64)
    utilities = rng.normal(size=(n_agents, rows, n_actions))
    weights = rng.uniform(0, 2, size=(rows, n_agents))
    bias = rng.normal(size=rows)
    skeys = rng.integers(0, rows, size=(n_batches, batch))
    actions = rng.integers(0, n_actions, size=(n_batches, n_agents, batch))
    rewards = rng.normal(size=(n_batches, batch))
    next_skeys = rng.integers(0, rows, size=(n_batches, batch))
    terminals = rng.integers(0, 2, size=(n_batches, batch)).astype(np.uint8)
    start = time.perf_counter()
    for i in range(n_batches):
        kernels.mix_update(utilities, counts, weights, bias, skeys[i],
                           actions[i], rewards[i], next_skeys[i],
                           terminals[i], 0.3, 0.95, -2.0, 2.0)
    return n_batches * batch / (time.perf_counter() - start)


def bench_training(total_steps=20000):
    config = parse_config({
        "env": {"kind": "foraging", "width": 3, "height": 3, "n_players": 2,
                "n_foods": 1, "max_player_level": 1, "coop": True,
                "sight": 2, "episode_limit": 8, "discount": 0.95},
        "schedule": {"total_steps": total_steps, "eval_period": total_steps,
                     "warmup_steps": 500, "eval_episodes": 5, "seeds": [0],
                     "batch_size": 128},
    })
    start = time.perf_counter()
    train(config, 0)
    return total_steps / (time.perf_counter() - start)


def main():
    print(f"kernel lane: {kernels.BACKEND}")
    print(f"td_update:     {bench_td():>12,.0f} records/s")
    print(f"switch_update: {bench_switch():>12,.0f} records/s")
    print(f"mix_update:    {bench_mix():>12,.0f} records/s")
    print(f"full training: {bench_training():>12,.0f} env steps/s")


if __name__ == "__main__":
    main()
