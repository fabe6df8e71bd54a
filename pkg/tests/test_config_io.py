"""Config parsing, gamma grids, and bit-stable file output."""

import json
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

from zeno_lab.config import (
    GridSpec,
    RunConfig,
    default_workers,
    load_config_file,
    parse_config,
    parse_grid_spec,
)
from zeno_lab.errors import ConfigError, DataIntegrityError
from zeno_lab.io import (
    MATRIX_SCHEMA,
    SERIES_SCHEMA,
    format_float,
    read_matrix,
    read_series,
    write_matrix,
    write_series,
)


# ---------------------------------------------------------------- grids


def test_grid_spec_parse_and_round_trip():
    g = parse_grid_spec("log:0.05:20:100")
    assert g == GridSpec(0.05, 20.0, 100)
    pts = g.relative()
    assert pts.shape == (100,)
    assert_allclose(pts, np.geomspace(0.05, 20.0, 100), rtol=0)
    assert_allclose(g.absolute(2.5), 2.5 * pts, rtol=0)
    assert str(g) == "log:0.05:20:100"
    assert parse_grid_spec(str(g)) == g


def test_grid_spec_rejects_malformed_text():
    for bad in ("lin:0.1:10:5", "log:0.1:10", "log:0.1:10:5:9", "log:a:10:5",
                "log:0:10:5", "log:-1:10:5", "log:10:0.1:5", "log:5:5:5",
                "log:0.1:10:1", "log:inf:10:5"):
        with pytest.raises(ValueError):
            parse_grid_spec(bad)


def test_grid_spec_absolute_needs_positive_critical_rate():
    with pytest.raises(ConfigError):
        GridSpec(0.1, 10.0, 5).absolute(0.0)


# ---------------------------------------------------------------- parsing


ENSEMBLE_TEXT = """\
# minimal master-equation run
mode = ensemble_ode

gamma = 2.0     # in units of omega_r
t_final = 12.0
dt = 0.01
"""


def test_parse_config_minimal_ensemble():
    cfg = parse_config(ENSEMBLE_TEXT)
    assert cfg.mode == "ensemble_ode"
    assert cfg.gamma == 2.0
    assert cfg.t_final == 12.0
    assert cfg.dt == 0.01
    # untouched defaults
    assert cfg.omega_r == 1.0
    assert cfg.delta == 0.0
    assert cfg.seed == 0
    assert cfg.workers == 1
    assert cfg.format == "csv"
    assert cfg.output_path() == "zeno_ensemble_ode.csv"


def test_parse_config_reports_key_and_line():
    with pytest.raises(ConfigError, match=r"run\.cfg:2.*mystery"):
        parse_config("mode = rates_scan\nmystery = 3\n", source="run.cfg")
    with pytest.raises(ConfigError, match=r":3.*duplicate key 'gamma'"):
        parse_config("mode = ensemble_ode\ngamma = 1\ngamma = 2\n")
    with pytest.raises(ConfigError, match=r":1.*key=value"):
        parse_config("just some words\n")
    with pytest.raises(ConfigError, match=r"'gamma'"):
        parse_config("mode = ensemble_ode\ngamma = -1\nt_final = 1\ndt = 0.1\n")


def test_parse_config_required_keys_per_mode():
    with pytest.raises(ConfigError, match="'mode'"):
        parse_config("gamma = 1\n")
    with pytest.raises(ConfigError, match="'dt'"):
        parse_config("mode = ensemble_ode\ngamma = 1\nt_final = 1\n")
    with pytest.raises(ConfigError, match="'n_pulses'"):
        parse_config("mode = pulsed_traj\ngamma = 1\n")
    with pytest.raises(ConfigError, match="'gamma_grid'"):
        parse_config("mode = rates_scan\n")


def test_parse_config_gamma_must_be_positive_for_measured_modes():
    # a gamma = 0 master equation is legal (it is plain Rabi), but the
    # trajectory modes measure, so their gamma must be positive
    parse_config("mode = ensemble_ode\ngamma = 0\nt_final = 1\ndt = 0.1\n")
    for mode, extra in (("pulsed_traj", "n_pulses = 4\n"),
                       ("continuous_traj", "t_final = 1\ndt = 0.1\n"),
                       ("poisson_ensemble", "t_final = 1\ndt = 0.1\n")):
        with pytest.raises(ConfigError, match="gamma > 0"):
            parse_config(f"mode = {mode}\ngamma = 0\n{extra}")


def test_parse_config_override_precedence_and_types():
    cfg = parse_config(ENSEMBLE_TEXT, overrides={"gamma": "3.5", "seed": 42})
    assert cfg.gamma == 3.5  # string override went through the converter
    assert cfg.seed == 42  # typed override passed straight through
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(ENSEMBLE_TEXT, overrides={"bogus": "1"})
    with pytest.raises(ConfigError, match=r"override gamma"):
        parse_config(ENSEMBLE_TEXT, overrides={"gamma": "fast"})


def test_parse_config_grid_modes_need_a_critical_rate():
    with pytest.raises(ConfigError, match="critical rate"):
        parse_config("mode = rates_scan\ngamma_grid = log:0.1:10:7\nomega_r = 0\n")


def test_workers_environment_variable(monkeypatch):
    monkeypatch.delenv("ZENO_LAB_WORKERS", raising=False)
    assert default_workers() == 1
    monkeypatch.setenv("ZENO_LAB_WORKERS", "3")
    assert default_workers() == 3
    cfg = parse_config(ENSEMBLE_TEXT)
    assert cfg.workers == 3
    # an explicit setting beats the environment
    cfg = parse_config(ENSEMBLE_TEXT + "workers = 2\n")
    assert cfg.workers == 2
    monkeypatch.setenv("ZENO_LAB_WORKERS", "zero")
    with pytest.raises(ConfigError):
        default_workers()


def test_load_config_file_round_trip(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(ENSEMBLE_TEXT)
    cfg = load_config_file(str(path), overrides={"n_traj": "7"})
    assert cfg.n_traj == 7
    with pytest.raises(ConfigError, match="cannot read"):
        load_config_file(str(tmp_path / "missing.cfg"))


def test_run_config_to_dict_echoes_settings():
    cfg = parse_config("mode = rates_scan\ngamma_grid = log:0.1:10:13\ndelta = 3\n"
                       "rate_source = stabilized\ntime_unit = rabi\n")
    d = cfg.to_dict()
    assert d["mode"] == "rates_scan"
    assert d["gamma_grid"] == "log:0.1:10:13"
    assert d["rate_source"] == "stabilized"
    assert d["time_unit"] == "rabi"
    assert "gamma" not in d  # unset optionals stay out of the echo


# ---------------------------------------------------------------- floats


def test_format_float_is_exact_and_avoids_minus_zero():
    assert format_float(0.0) == "0"
    assert format_float(-0.0) == "0"
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(200) * 10.0 ** rng.integers(-250, 250, 200)
    for x in vals:
        assert float(format_float(x)) == x


# ---------------------------------------------------------------- series


def test_write_series_csv_round_trip_is_bit_exact(tmp_path):
    path = str(tmp_path / "out.csv")
    t = np.array([0.1, 1.0 / 3.0, np.pi, 1e-300, 1e17 + 1.0])
    z = np.array([1.0, -2.0 / 3.0, 5e-324, -0.0, 0.123456789012345678])
    write_series(path, ["t", "z"], [t, z], master_seed=99,
                 time_unit="rabi")
    meta, names, cols = read_series(path)
    assert meta["schema"] == SERIES_SCHEMA
    assert meta["seed"] == 99
    assert meta["time_unit"] == "rabi"
    assert names == ["t", "z"]
    assert np.array_equal(cols["t"], t)
    assert np.array_equal(cols["z"], z)


def test_write_series_label_column(tmp_path):
    path = str(tmp_path / "labels.csv")
    write_series(path, ["gamma", "regime"], [[0.5, 2.0], ["anti_zeno", "zeno"]],
                 master_seed=1)
    _, names, cols = read_series(path)
    assert cols["regime"] == ["anti_zeno", "zeno"]
    assert np.array_equal(cols["gamma"], [0.5, 2.0])


def test_write_series_empty_is_header_only(tmp_path):
    path = str(tmp_path / "empty.csv")
    write_series(path, ["t", "z"], [[], []], master_seed=0)
    text = open(path).read()
    assert text.splitlines()[-1] == "t,z"
    _, names, cols = read_series(path)
    assert names == ["t", "z"]
    assert cols["t"].size == 0


def test_write_series_json_payload(tmp_path):
    path = str(tmp_path / "out.json")
    write_series(path, ["t", "z"], [[0.5], [1.0 / 7.0]], master_seed=5,
                 format="json", config={"mode": "ensemble_ode", "gamma": 2.0})
    payload = json.loads(open(path).read())
    assert payload["schema"] == SERIES_SCHEMA
    assert payload["seed"] == 5
    assert payload["config"]["gamma"] == 2.0
    assert payload["columns"]["z"] == [1.0 / 7.0]  # json floats round-trip
    meta, names, cols = read_series(path)
    assert meta["seed"] == 5
    assert np.array_equal(cols["z"], [1.0 / 7.0])


def test_write_series_validation_errors(tmp_path):
    path = str(tmp_path / "bad.csv")
    with pytest.raises(DataIntegrityError, match="'z'"):
        write_series(path, ["t", "z"], [[0.0], [np.nan]], master_seed=0)
    assert not os.path.exists(path)  # nothing written on failure
    with pytest.raises(ValueError, match="length"):
        write_series(path, ["t", "z"], [[0.0, 1.0], [0.0]], master_seed=0)
    with pytest.raises(ValueError):
        write_series(path, ["t"], [[0.0], [0.0]], master_seed=0)
    with pytest.raises(DataIntegrityError, match="text cell"):
        write_series(path, ["name"], [["with,comma"]], master_seed=0)
    with pytest.raises(ValueError, match="format"):
        write_series(path, ["t"], [[0.0]], master_seed=0, format="xml")


def test_failed_write_preserves_existing_file(tmp_path):
    path = str(tmp_path / "keep.csv")
    write_series(path, ["t"], [[1.0]], master_seed=3)
    before = open(path).read()
    with pytest.raises(DataIntegrityError):
        write_series(path, ["t"], [[np.inf]], master_seed=4)
    assert open(path).read() == before
    # and no temp droppings either way
    assert [p.name for p in tmp_path.iterdir()] == ["keep.csv"]


# ---------------------------------------------------------------- matrix


def test_write_matrix_csv_round_trip(tmp_path):
    path = str(tmp_path / "heat.csv")
    rows = np.geomspace(0.1, 10.0, 4)
    cols = np.linspace(0.0, 2.0, 5)
    vals = np.outer(rows, 1.0 / (1.0 + cols))
    write_matrix(path, "gamma_over_crit", rows, cols, vals, master_seed=11)
    meta, label, r, c, v = read_matrix(path)
    assert meta["schema"] == MATRIX_SCHEMA
    assert meta["seed"] == 11
    assert label == "gamma_over_crit"
    assert np.array_equal(r, rows)
    assert np.array_equal(c, cols)
    assert np.array_equal(v, vals)
    header = open(path).read().splitlines()[2]
    assert header.startswith("gamma_over_crit,")


def test_write_matrix_json_and_shape_check(tmp_path):
    path = str(tmp_path / "heat.json")
    write_matrix(path, "g", [1.0, 2.0], [0.0, 1.0, 2.0],
                 [[1, 2, 3], [4, 5, 6]], master_seed=0, format="json")
    meta, label, r, c, v = read_matrix(path)
    assert v.shape == (2, 3)
    assert v[1, 2] == 6.0
    with pytest.raises(ValueError, match="shape"):
        write_matrix(path, "g", [1.0], [0.0, 1.0], [[1, 2], [3, 4]],
                     master_seed=0)
    with pytest.raises(DataIntegrityError):
        write_matrix(path, "g", [1.0], [0.0], [[np.nan]], master_seed=0)
