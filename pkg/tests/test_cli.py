import json

import pytest

from fracback.cli import main

CONFIG = """
problem.T = 0.1
problem.cap = 8
problem.nonlinearity = sin
problem.initial_modes = 1:1.0, 2:0.5
noise.sigma = 0.05
grid.steps = 50
run.n = 32
run.trials = 3
run.sweep = 16, 32, 64
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "experiment.cfg"
    path.write_text(CONFIG, encoding="utf-8")
    return path


def test_missing_config_is_invalid_input(capsys):
    assert main(["mise"]) == 1
    err = capsys.readouterr().err
    assert "--config" in err
    assert "run.seed" in err


def test_unknown_option_is_invalid_input():
    assert main(["mise", "--colour", "red"]) == 1


def test_invalid_config_value(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("run.n = 2\n", encoding="utf-8")
    assert main(["mise", "--config", str(path)]) == 1


def test_forward_writes_trajectory(config_file, tmp_path):
    out = tmp_path / "forward"
    assert main(["forward", "--config", str(config_file), "--out", str(out)]) == 0
    lines = (out / "trajectory.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,p,coefficient"
    assert len(lines) == 1 + 51 * 9


def test_regularize_writes_trial_files(config_file, tmp_path):
    out = tmp_path / "single"
    assert main(["regularize", "--config", str(config_file), "--out", str(out), "--trial", "2",
                 "--seed", "4"]) == 0
    report = json.loads((out / "trial_2.json").read_text(encoding="utf-8"))
    assert report["trial"] == 2
    assert report["seed"] == 4
    assert (out / "observed_2.csv").read_text(encoding="utf-8").startswith("# seed=4 trial=2")
    assert (out / "trial_2.csv").exists()


def test_mise_is_reproducible(config_file, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["mise", "--config", str(config_file), "--out", str(first), "--seed", "9"]) == 0
    assert main(["mise", "--config", str(config_file), "--out", str(second), "--seed", "9",
                 "--workers", "2"]) == 0
    for name in ("mise.csv", "trials.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    estimate = json.loads((first / "mise.json").read_text(encoding="utf-8"))
    assert estimate["trials"] == 3
    assert estimate["seed"] == 9


def test_method_override(config_file, tmp_path):
    out = tmp_path / "second"
    assert main(["mise", "--config", str(config_file), "--out", str(out), "--method", "second_truncation",
                 "--trials", "2"]) == 0
    assert json.loads((out / "mise.json").read_text(encoding="utf-8"))["method"] == "second_truncation"


def test_seed_from_environment(config_file, tmp_path, monkeypatch):
    monkeypatch.setenv("FRACBACK_SEED", "21")
    out = tmp_path / "env"
    assert main(["mise", "--config", str(config_file), "--out", str(out), "--trials", "1"]) == 0
    assert json.loads((out / "mise.json").read_text(encoding="utf-8"))["seed"] == 21


def test_sweep_writes_csv(config_file, tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config_file), "--out", str(out), "--trials", "2"]) == 0
    lines = (out / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n,M_n,t,mise,stderr,bound,slope"
    assert len(lines) == 1 + 3 * 2
    assert (out / "sweep.json").exists()


def test_numerical_failure_exit_code(tmp_path):
    path = tmp_path / "stiff.cfg"
    path.write_text(CONFIG + "regularizer.picard_max_iters = 1\n", encoding="utf-8")
    assert main(["mise", "--config", str(path), "--out", str(tmp_path / "out")]) == 2


def test_check_command(capsys):
    assert main(["check"]) == 0
    out = capsys.readouterr().out
    assert "PASS discrete_orthonormality" in out
    assert "FAIL" not in out
