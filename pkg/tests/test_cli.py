"""Command-line behaviour: exit codes, precedence, determinism."""

import json
import os

import numpy as np
import pytest

from zeno_lab.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_REGIME,
    main,
)
from zeno_lab.io import read_series


@pytest.fixture(autouse=True)
def _workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("ZENO_LAB_WORKERS", raising=False)
    return tmp_path


def _run(*argv):
    return main(list(argv))


def test_ensemble_run_writes_default_output(capsys):
    code = _run("ensemble", "--set", "gamma=2", "--set", "t_final=2",
                "--set", "dt=0.01")
    assert code == EXIT_OK
    assert os.path.exists("zeno_ensemble_ode.csv")
    line = capsys.readouterr().out.strip()
    assert line.startswith("ensemble_ode M=1")
    assert line.endswith("zeno_ensemble_ode.csv")
    meta, names, cols = read_series("zeno_ensemble_ode.csv")
    assert names == ["t", "x", "y", "z", "p1"]
    assert meta["seed"] == 0
    assert cols["z"][0] == 1.0


def test_flag_beats_set_beats_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mode = ensemble_ode\ngamma = 2\nt_final = 1\ndt = 0.01\n"
                   "seed = 1\nformat = csv\n")
    code = _run("ensemble", "--config", str(cfg), "--set", "seed=2",
                "--set", "format=json", "--seed", "3", "--out", "o.json")
    assert code == EXIT_OK
    payload = json.loads(open("o.json").read())
    assert payload["seed"] == 3  # --seed outranks --set outranks the file
    assert payload["config"]["format"] == "json"


def test_workers_env_is_honoured_and_invisible_in_output(monkeypatch):
    args = ("ensemble", "--set", "mode=poisson_ensemble", "--set", "gamma=2",
            "--set", "t_final=0.3", "--set", "dt=0.01", "--set", "n_traj=20",
            "--format", "json")
    monkeypatch.setenv("ZENO_LAB_WORKERS", "nope")
    assert _run(*args, "--out", "w.json") == EXIT_CONFIG  # env reaches config
    monkeypatch.setenv("ZENO_LAB_WORKERS", "2")
    assert _run(*args, "--out", "w.json") == EXIT_OK
    two_workers = open("w.json", "rb").read()
    monkeypatch.delenv("ZENO_LAB_WORKERS")
    assert _run(*args, "--out", "w.json") == EXIT_OK
    # output bytes are a pure function of (config, seed): the worker
    # count neither shows up in the echo nor perturbs the data
    assert "workers" not in json.loads(two_workers)["config"]
    assert open("w.json", "rb").read() == two_workers


def test_config_errors_exit_2(capsys):
    # --set without '='
    assert _run("ensemble", "--set", "gamma") == EXIT_CONFIG
    # unknown key
    assert _run("ensemble", "--set", "bogus=1") == EXIT_CONFIG
    # missing required keys for the mode
    assert _run("ensemble", "--set", "gamma=1") == EXIT_CONFIG
    # simulate has no default mode
    assert _run("simulate", "--set", "gamma=1", "--set", "n_pulses=4") == EXIT_CONFIG
    # mode/subcommand mismatch
    assert _run("rates", "--set", "mode=ensemble_ode", "--set", "gamma=1",
                "--set", "t_final=1", "--set", "dt=0.01") == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_subcommand_honours_mode_from_config_file(tmp_path):
    cfg = tmp_path / "poisson.cfg"
    cfg.write_text("mode = poisson_ensemble\ngamma = 1\nt_final = 0.5\n"
                   "dt = 0.01\nn_traj = 20\n")
    assert _run("ensemble", "--config", str(cfg), "--out", "p.csv") == EXIT_OK
    _, names, _ = read_series("p.csv")
    assert "z_err" in names
    # the same file is not acceptable to the sweep subcommand
    assert _run("sweep", "--config", str(cfg)) == EXIT_CONFIG


def test_out_of_regime_rate_formula_exits_3():
    # the pulsed mixing-rate formula breaks down once a single interval
    # flips the state with probability 1/2 or more; simulating such a
    # trajectory is fine, asking for its rate law is not
    code = _run("rates", "--set", "rate_source=pulsed",
                "--set", "gamma_grid=log:0.3:0.5:5")
    assert code == EXIT_REGIME


def test_unfittable_envelope_exits_4(capsys):
    # near-critical damping: the ensemble rings but shows a single usable
    # peak, so the envelope fit reports insufficient data
    code = _run("rates", "--set", "rate_source=lindblad_fit",
                "--set", "gamma_grid=log:0.6:0.65:3")
    assert code == EXIT_NUMERICAL
    assert "numerical error" in capsys.readouterr().err


def test_unwritable_output_exits_5():
    code = _run("ensemble", "--set", "gamma=1", "--set", "t_final=1",
                "--set", "dt=0.01", "--out", "no/such/dir/out.csv")
    assert code == EXIT_IO


def test_same_seed_same_bytes_different_seed_different_bytes():
    args = ("ensemble", "--set", "mode=poisson_ensemble", "--set", "gamma=2",
            "--set", "t_final=0.5", "--set", "dt=0.01", "--set", "n_traj=30")
    assert _run(*args, "--seed", "11", "--out", "a.csv") == EXIT_OK
    assert _run(*args, "--seed", "11", "--out", "b.csv") == EXIT_OK
    assert _run(*args, "--seed", "12", "--out", "c.csv") == EXIT_OK
    a, b, c = (open(p, "rb").read() for p in ("a.csv", "b.csv", "c.csv"))
    assert a == b
    # the seed comment line differs by construction; the data must too
    assert a.split(b"\n")[3:] != c.split(b"\n")[3:]


def test_rates_scan_reports_critical_rate(capsys):
    code = _run("rates", "--set", "delta=3", "--set", "rate_source=stabilized",
                "--set", "gamma_grid=log:0.2:5:41")
    assert code == EXIT_OK
    line = capsys.readouterr().out
    assert "source=stabilized" in line
    assert "critical_gamma=" in line
    _, names, cols = read_series("zeno_rates_scan.csv")
    assert names == ["gamma", "gamma_mix", "response", "regime"]
    assert set(cols["regime"]) <= {"zeno", "anti_zeno", "critical"}


def test_simulate_trajectory_output_columns():
    code = _run("simulate", "--set", "mode=continuous_traj", "--set", "gamma=2",
                "--set", "t_final=0.2", "--set", "dt=0.01",
                "--set", "filter_tau=0.05", "--seed", "5", "--out", "traj.csv")
    assert code == EXIT_OK
    _, names, cols = read_series("traj.csv")
    assert names == ["t", "x", "y", "z", "p1", "r_raw", "r_filtered"]
    assert np.all(np.abs(cols["z"]) <= 1.0 + 1e-12)


def test_validate_subcommand_passes(capsys):
    assert _run("validate") == EXIT_OK
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
