"""Run configuration: flat key=value files plus command-line overrides.

Configs are text documents of ``key=value`` lines (``#`` comments,
blank lines ignored).  Every key is checked against the known set and
its converter; anything unknown or malformed is reported with the key
name and line number.  Overrides are applied after the file, so flags
win.  Rates are in units of omega_r unless a ``time_unit`` label says
otherwise; that label is informational and travels into the output
metadata.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

MODES = (
    "pulsed_traj",
    "continuous_traj",
    "ensemble_ode",
    "poisson_ensemble",
    "sweep_heatmap",
    "rates_scan",
)
FORMATS = ("csv", "json")
RATE_SOURCES = ("pulsed", "continuous_orthogonal", "stabilized", "lindblad_fit")
DYNAMICS_SOURCES = ("analytic", "lindblad")
T1_DIRECTIONS = ("toward_state_0", "toward_state_1")

WORKERS_ENV = "ZENO_LAB_WORKERS"

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced gamma grid, in units of the model's critical rate."""

    start: float
    stop: float
    count: int

    def relative(self) -> np.ndarray:
        return np.geomspace(self.start, self.stop, self.count)

    def absolute(self, gamma_crit: float) -> np.ndarray:
        if not gamma_crit > 0:
            raise ConfigError(
                "gamma_grid is relative to the critical rate, which is 0 for this model"
            )
        return self.relative() * gamma_crit

    def __str__(self) -> str:
        return f"log:{self.start:g}:{self.stop:g}:{self.count}"


def parse_grid_spec(text: str) -> GridSpec:
    """Parse ``log:START:STOP:COUNT`` (relative to gamma_crit)."""
    parts = text.split(":")
    if len(parts) != 4 or parts[0] != "log":
        raise ValueError(f"grid spec must look like log:START:STOP:COUNT, got {text!r}")
    try:
        start, stop = float(parts[1]), float(parts[2])
        count = int(parts[3])
    except ValueError:
        raise ValueError(f"malformed grid spec {text!r}") from None
    if not (math.isfinite(start) and math.isfinite(stop) and 0 < start < stop):
        raise ValueError(f"grid spec needs 0 < START < STOP, got {text!r}")
    if count < 2:
        raise ValueError(f"grid spec needs COUNT >= 2, got {count}")
    return GridSpec(start, stop, count)


@dataclass(frozen=True)
class RunConfig:
    """Fully validated description of one run."""

    mode: str
    omega_r: float = 1.0
    delta: float = 0.0
    gamma: float | None = None
    gamma_one: float = 0.0
    t1_jump_direction: str = "toward_state_0"
    t_final: float | None = None
    dt: float | None = None
    n_pulses: int | None = None
    substeps: int = 1
    filter_tau: float | None = None
    record_stride: int = 1
    n_traj: int = 1000
    seed: int = 0
    workers: int = 1
    out: str | None = None
    format: str = "csv"
    gamma_grid: GridSpec | None = None
    nt: int = 121
    rate_source: str | None = None
    dynamics_source: str | None = None
    time_unit: str | None = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def output_path(self) -> str:
        if self.out is not None:
            return self.out
        return f"zeno_{self.mode}.{self.format}"

    def to_dict(self) -> dict:
        """Resolved settings for embedding in output metadata."""
        out = {"mode": self.mode, "omega_r": self.omega_r, "delta": self.delta,
               "gamma_one": self.gamma_one, "t1_jump_direction": self.t1_jump_direction,
               "substeps": self.substeps, "record_stride": self.record_stride,
               "n_traj": self.n_traj, "seed": self.seed, "format": self.format,
               "nt": self.nt, "out": self.output_path()}
        for key in ("gamma", "t_final", "dt", "n_pulses", "filter_tau",
                    "rate_source", "dynamics_source", "time_unit"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.gamma_grid is not None:
            out["gamma_grid"] = str(self.gamma_grid)
        return out


def _conv_float(value: str) -> float:
    x = float(value)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _conv_nonneg(value: str) -> float:
    x = _conv_float(value)
    if x < 0:
        raise ValueError("must be >= 0")
    return x


def _conv_pos(value: str) -> float:
    x = _conv_float(value)
    if x <= 0:
        raise ValueError("must be > 0")
    return x


def _conv_int_min(minimum: int):
    def conv(value: str) -> int:
        n = int(value)
        if n < minimum:
            raise ValueError(f"must be >= {minimum}")
        return n

    return conv


def _conv_seed(value: str) -> int:
    n = int(value)
    if not 0 <= n <= _U64_MAX:
        raise ValueError("must fit in an unsigned 64-bit integer")
    return n


def _conv_choice(choices):
    def conv(value: str) -> str:
        if value not in choices:
            raise ValueError(f"must be one of {', '.join(choices)}")
        return value

    return conv


_CONVERTERS = {
    "mode": _conv_choice(MODES),
    "omega_r": _conv_nonneg,
    "delta": _conv_float,
    "gamma": _conv_nonneg,
    "gamma_one": _conv_nonneg,
    "t1_jump_direction": _conv_choice(T1_DIRECTIONS),
    "t_final": _conv_pos,
    "dt": _conv_pos,
    "n_pulses": _conv_int_min(1),
    "substeps": _conv_int_min(1),
    "filter_tau": _conv_pos,
    "record_stride": _conv_int_min(1),
    "n_traj": _conv_int_min(1),
    "seed": _conv_seed,
    "workers": _conv_int_min(1),
    "out": str,
    "format": _conv_choice(FORMATS),
    "gamma_grid": parse_grid_spec,
    "nt": _conv_int_min(2),
    "rate_source": _conv_choice(RATE_SOURCES),
    "dynamics_source": _conv_choice(DYNAMICS_SOURCES),
    "time_unit": str,
}

_REQUIRED = {
    "pulsed_traj": ("gamma", "n_pulses"),
    "continuous_traj": ("gamma", "t_final"),
    "ensemble_ode": ("gamma", "t_final", "dt"),
    "poisson_ensemble": ("gamma", "t_final", "dt"),
    "sweep_heatmap": ("gamma_grid", "t_final"),
    "rates_scan": ("gamma_grid",),
}

# modes whose measurement stage is meaningless at gamma = 0
_NEEDS_POSITIVE_GAMMA = ("pulsed_traj", "continuous_traj", "poisson_ensemble")


def default_workers() -> int:
    """Worker count from the environment, 1 if unset."""
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV}={raw!r} is not a positive integer") from None
    return n


def _convert(key: str, value: str, where: str):
    conv = _CONVERTERS.get(key)
    if conv is None:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        return conv(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None


def parse_config(text: str | None = None, overrides: dict | None = None,
                 source: str = "<config>") -> RunConfig:
    """Parse and validate a config document plus overrides into a RunConfig.

    ``overrides`` maps keys to strings (as from ``--set key=value``) or
    to already-typed values (as from dedicated flags); they are applied
    after the file.  Raises :class:`ConfigError` with the key name and
    line for anything unknown, malformed, or inconsistent.
    """
    settings: dict = {}
    if text is not None:
        seen: dict[str, int] = {}
        for lineno, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key in seen:
                raise ConfigError(
                    f"{source}:{lineno}: duplicate key {key!r} (first on line {seen[key]})"
                )
            seen[key] = lineno
            settings[key] = _convert(key, value, f"{source}:{lineno}")
    for key, value in (overrides or {}).items():
        if isinstance(value, str):
            settings[key] = _convert(key, value, f"override {key}")
        elif key in _CONVERTERS:
            settings[key] = value
        else:
            raise ConfigError(f"override {key}: unknown key")

    if "workers" not in settings:
        settings["workers"] = default_workers()

    mode = settings.get("mode")
    if mode is None:
        raise ConfigError("missing required key 'mode'")
    for key in _REQUIRED[mode]:
        if key not in settings:
            raise ConfigError(f"mode {mode} requires key {key!r}")
    if mode in _NEEDS_POSITIVE_GAMMA and not settings.get("gamma", 0) > 0:
        raise ConfigError(f"mode {mode} requires gamma > 0")

    config = RunConfig(raw=dict(settings), **settings)
    if config.mode in ("sweep_heatmap", "rates_scan") and config.omega_r == 0 \
            and config.delta == 0:
        raise ConfigError("gamma_grid needs a nonzero critical rate; set omega_r or delta")
    return config


def load_config_file(path: str, overrides: dict | None = None) -> RunConfig:
    """Read a config file and parse it; missing file raises ConfigError."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, overrides, source=path)
