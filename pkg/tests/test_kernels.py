"""Lane parity: the compiled kernels must equal the pure-Python fallback
bit for bit on float64."""

import os
import subprocess
import sys

import numpy as np
import pytest

from switchmarl.kernels import BACKEND, fallback

try:
    from switchmarl.kernels import _speedups
except ImportError:
    _speedups = None

needs_compiled = pytest.mark.skipif(_speedups is None,
                                    reason="compiled kernels not built")


def random_td_args(rng, rows=12, n_actions=4, n=64):
    q = rng.normal(size=(rows, n_actions))
    keys = rng.integers(0, rows, size=n)
    actions = rng.integers(0, n_actions, size=n)
    rewards = rng.normal(size=n)
    next_keys = rng.integers(0, rows, size=n)
    terminals = rng.integers(0, 2, size=n).astype(np.uint8)
    return q, keys, actions, rewards, next_keys, terminals


@needs_compiled
class TestLaneParity:
    def test_td_update_bit_identical(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            q, keys, actions, rewards, next_keys, terminals = random_td_args(rng)
            qa, qb = q.copy(), q.copy()
            fallback.td_update(qa, keys, actions, rewards, next_keys,
                               terminals, 0.37, 0.99)
            _speedups.td_update(qb, keys, actions, rewards, next_keys,
                                terminals, 0.37, 0.99)
            np.testing.assert_array_equal(qa, qb)

    def test_switch_update_bit_identical(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            q = rng.normal(size=(10, 2))
            n = 48
            keys = rng.integers(0, 10, size=n)
            gs = rng.integers(0, 2, size=n)
            rewards = rng.normal(size=n)
            next_keys = rng.integers(0, 10, size=n)
            next_allow = rng.integers(0, 2, size=n).astype(np.uint8)
            terminals = rng.integers(0, 2, size=n).astype(np.uint8)
            qa, qb = q.copy(), q.copy()
            fallback.switch_update(qa, keys, gs, rewards, next_keys,
                                   next_allow, terminals, 0.21, 0.95, 0.013)
            _speedups.switch_update(qb, keys, gs, rewards, next_keys,
                                    next_allow, terminals, 0.21, 0.95, 0.013)
            np.testing.assert_array_equal(qa, qb)

    def test_mix_update_bit_identical(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n_agents, rows, a_max, n = 3, 8, 5, 40
            counts = np.array([5, 3, 4], dtype=np.int64)
            utils = rng.normal(size=(n_agents, rows, a_max))
            weights = rng.uniform(0, 2, size=(rows, n_agents))
            bias = rng.normal(size=rows)
            skeys = rng.integers(0, rows, size=n)
            actions = np.stack([rng.integers(0, counts[i], size=n)
                                for i in range(n_agents)])
            rewards = rng.normal(size=n)
            next_skeys = rng.integers(0, rows, size=n)
            terminals = rng.integers(0, 2, size=n).astype(np.uint8)
            ua, wa, ba = utils.copy(), weights.copy(), bias.copy()
            ub, wb, bb = utils.copy(), weights.copy(), bias.copy()
            fallback.mix_update(ua, counts, wa, ba, skeys, actions, rewards,
                                next_skeys, terminals, 0.11, 0.97, -2.0, 2.0)
            _speedups.mix_update(ub, counts, wb, bb, skeys, actions, rewards,
                                 next_skeys, terminals, 0.11, 0.97, -2.0, 2.0)
            np.testing.assert_array_equal(ua, ub)
            np.testing.assert_array_equal(wa, wb)
            np.testing.assert_array_equal(ba, bb)


_TRAIN_SNIPPET = """
import hashlib, io
from switchmarl.config import parse_config
from switchmarl.harness import train
from switchmarl.reporting import write_metrics_csv
from switchmarl import kernels
cfg = parse_config({
    "env": {"kind": "foraging", "width": 4, "height": 4, "n_players": 2,
            "n_foods": 1, "max_player_level": 1, "coop": True,
            "episode_limit": 12},
    "schedule": {"total_steps": 1500, "eval_period": 500, "warmup_steps": 100,
                 "eval_episodes": 3, "seeds": [0]},
})
run = train(cfg, 5)
import tempfile, os, sys
path = os.path.join(tempfile.mkdtemp(), "m.csv")
write_metrics_csv(path, run.metrics)
print(kernels.BACKEND, hashlib.sha256(open(path, "rb").read()).hexdigest())
"""


@needs_compiled
def test_full_run_identical_across_lanes():
    """A whole training run produces byte-identical metrics in both lanes."""
    def run_lane(force_pure):
        env = dict(os.environ)
        if force_pure:
            env["SWITCHMARL_PURE_PYTHON"] = "1"
        else:
            env.pop("SWITCHMARL_PURE_PYTHON", None)
        out = subprocess.run([sys.executable, "-c", _TRAIN_SNIPPET],
                             capture_output=True, text=True, env=env,
                             check=True)
        return out.stdout.split()

    compiled = run_lane(False)
    pure = run_lane(True)
    assert compiled[0] == "compiled"
    assert pure[0] == "python"
    assert compiled[1] == pure[1]


def test_backend_reports_a_lane():
    assert BACKEND in ("compiled", "python")
