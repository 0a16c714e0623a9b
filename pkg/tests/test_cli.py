"""Command-line surface: subcommands, exit codes, artifact layout."""

import json

import pytest

from switchmarl.cli import main
from switchmarl.reporting import METRICS_COLUMNS


@pytest.fixture
def config_path(tmp_path):
    cfg = {
        "env": {"kind": "assurance", "alpha": 0.5},
        "schedule": {"total_steps": 800, "eval_period": 400,
                     "warmup_steps": 100, "eval_episodes": 3,
                     "seeds": [0, 1]},
        "output": {"directory": str(tmp_path / "runs")},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture
def mdp_path(tmp_path):
    path = tmp_path / "mdp.json"
    path.write_text(json.dumps({
        "discount": 0.9,
        "rewards": [[5.0, 1.0]],
        "transitions": [[[1.0], [1.0]]],
        "central_policy": [0],
    }))
    return path


class TestTrain:
    def test_writes_run_directory(self, config_path, tmp_path, capsys):
        out = tmp_path / "run0"
        assert main(["train", "--config", str(config_path), "--seed", "0",
                     "--out", str(out)]) == 0
        header = (out / "metrics.csv").read_text().splitlines()[0]
        assert header == ",".join(METRICS_COLUMNS)
        assert (out / "summary.json").exists()
        assert "run complete" in capsys.readouterr().out

    def test_unknown_config_key_fails(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"env": {"kind": "assurance", "alpha": 0.5},
                                   "learners": {"misspelled": 1}}))
        assert main(["train", "--config", str(bad), "--seed", "0",
                     "--out", str(tmp_path / "x")]) == 1
        assert "misspelled" in capsys.readouterr().err

    def test_missing_config_file_fails(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "nope.json"),
                     "--seed", "0", "--out", str(tmp_path / "x")]) == 1

    def test_usage_error_exit_code(self):
        assert main(["train", "--config"]) == 1
        assert main(["no-such-command"]) == 1


class TestBaselineRandom:
    def test_roughly_half_cl_calls(self, config_path, tmp_path):
        out = tmp_path / "rand"
        assert main(["baseline-random", "--config", str(config_path),
                     "--seed", "0", "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["mode"] == "random"
        assert 40.0 <= summary["cl_call_pct"] <= 60.0

    def test_deterministic(self, config_path, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            main(["baseline-random", "--config", str(config_path),
                  "--seed", "3", "--out", str(out)])
            outs.append((out / "metrics.csv").read_bytes())
        assert outs[0] == outs[1]


class TestSweep:
    def test_alpha_sweep_results(self, config_path, tmp_path, capsys):
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(config_path), "--param",
                     "alpha", "--values", "0,1", "--out", str(out)]) == 0
        lines = (out / "results.csv").read_text().splitlines()
        assert lines[0] == "value,seed,final_return,total_cl_calls,cl_call_pct"
        assert len(lines) == 1 + 2 * 2  # two values x two seeds

    def test_unknown_param_fails(self, config_path, tmp_path):
        assert main(["sweep", "--config", str(config_path), "--param",
                     "nope", "--values", "1", "--out", str(tmp_path)]) == 1


class TestOracle:
    def test_prints_solution(self, mdp_path, capsys):
        assert main(["oracle", "--mdp", str(mdp_path), "--c", "0.01"]) == 0
        out = capsys.readouterr().out
        assert "state value best_direct activate_value activate" in out
        value = float(out.splitlines()[1].split()[1])
        assert value == pytest.approx(50.0, abs=1e-8)  # absorbing fixed point
        assert "converged" in out

    def test_budgeted_output(self, mdp_path, capsys):
        assert main(["oracle", "--mdp", str(mdp_path), "--c", "0.01",
                     "--budget", "2"]) == 0
        out = capsys.readouterr().out
        assert "state remaining value activate" in out
        assert len([l for l in out.splitlines() if l and l[0].isdigit()]) == 3

    def test_missing_fixture_fails(self, tmp_path):
        assert main(["oracle", "--mdp", str(tmp_path / "gone.json"),
                     "--c", "0.1"]) == 1


class TestReport:
    def test_aggregate_and_failure_rate(self, config_path, tmp_path, capsys):
        root = tmp_path / "family"
        for seed in ("0", "1"):
            main(["train", "--config", str(config_path), "--seed", seed,
                  "--out", str(root / f"seed_{seed}")])
        assert main(["report", "--runs", str(root), "--heatmap",
                     "--failure-threshold", "0.8"]) == 0
        out = capsys.readouterr().out
        assert (root / "aggregate.csv").exists()
        assert (root / "heatmap.csv").exists()
        assert "failure rate" in out

    def test_empty_directory_fails(self, tmp_path):
        (tmp_path / "empty").mkdir()
        assert main(["report", "--runs", str(tmp_path / "empty")]) == 1
