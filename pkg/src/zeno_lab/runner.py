"""Dispatch from a validated RunConfig to simulation output files.

One handler per mode; all handlers write through the atomic emitters in
:mod:`zeno_lab.io` and return their summary fields.  Output bytes are a
pure function of (config, seed): wall time appears only in the printed
summary, never in the files.
"""

from __future__ import annotations

import time

import numpy as np

from .analysis import (
    analytic_heatmap_source,
    continuous_orthogonal_rate_source,
    critical_rate,
    heatmap_grid,
    lindblad_fit_rate_source,
    lindblad_heatmap_source,
    locate_critical_rate,
    pulsed_rate_source,
    stabilized_rate_source,
    zeno_response_scan,
)
from .config import RunConfig
from .continuous import ContinuousConfig, exponential_filter, simulate_continuous_trajectory
from .ensemble import (
    LindbladParams,
    T1Direction,
    bloch_series,
    integrate_master_equation,
    simulate_poisson_ensemble,
)
from .io import TABLE_SCHEMA, write_matrix, write_series
from .pulsed import PulsedConfig, simulate_pulsed_trajectory
from .qubit import ModelParams, QubitState

SERIES_NAMES = ("t", "x", "y", "z", "p1")


def _model(config: RunConfig) -> ModelParams:
    return ModelParams(omega_r=config.omega_r, delta=config.delta,
                       gamma=config.gamma if config.gamma is not None else 0.0)


def _lindblad(config: RunConfig) -> LindbladParams:
    return LindbladParams(model=_model(config), gamma_one=config.gamma_one,
                          t1_jump_direction=T1Direction(config.t1_jump_direction))


def _series_columns(times, bloch):
    z = bloch[:, 2]
    return [times, bloch[:, 0], bloch[:, 1], z, 0.5 * (1.0 + z)]


def _write(config, out, names, columns, schema_kwargs=None):
    write_series(out, names, columns, master_seed=config.seed, format=config.format,
                 config=config.to_dict(), time_unit=config.time_unit,
                 **(schema_kwargs or {}))


def _run_pulsed_traj(config: RunConfig, out: str) -> dict:
    sim = PulsedConfig(params=_model(config), n_pulses=config.n_pulses,
                       rng_seed=config.seed, dt_pulse=config.dt,
                       substeps=config.substeps)
    record = simulate_pulsed_trajectory(sim)
    names = SERIES_NAMES + ("r_raw",)
    columns = _series_columns(record.times, record.bloch) + [record.readouts]
    _write(config, out, names, columns)
    return {"n_traj": 1}


def _run_continuous_traj(config: RunConfig, out: str) -> dict:
    sim = ContinuousConfig(params=_model(config), t_final=config.t_final,
                           dt_step=config.dt, rng_seed=config.seed,
                           filter_tau=config.filter_tau)
    record = simulate_continuous_trajectory(sim)
    names = SERIES_NAMES + ("r_raw",)
    columns = _series_columns(record.times, record.bloch) + [record.readouts]
    if config.filter_tau is not None:
        names = names + ("r_filtered",)
        columns.append(exponential_filter(record.readouts, sim.dt_step, config.filter_tau))
    _write(config, out, names, columns)
    return {"n_traj": 1}


def _run_ensemble_ode(config: RunConfig, out: str) -> dict:
    times, rhos = integrate_master_equation(_lindblad(config), QubitState.excited(),
                                            config.t_final, config.dt)
    _write(config, out, SERIES_NAMES, _series_columns(times, bloch_series(rhos)))
    return {"n_traj": 1}


def _run_poisson_ensemble(config: RunConfig, out: str) -> dict:
    result = simulate_poisson_ensemble(_model(config), config.t_final, config.dt,
                                       n_traj=config.n_traj, master_seed=config.seed,
                                       workers=config.workers,
                                       record_stride=config.record_stride)
    names = SERIES_NAMES + ("x_err", "y_err", "z_err")
    columns = _series_columns(result.times, result.mean_bloch) + [
        result.stderr_bloch[:, 0], result.stderr_bloch[:, 1], result.stderr_bloch[:, 2]
    ]
    _write(config, out, names, columns)
    return {"n_traj": config.n_traj}


def _run_sweep_heatmap(config: RunConfig, out: str) -> dict:
    model = _model(config)
    crit = critical_rate(model)
    relative = config.gamma_grid.relative()
    gammas = relative * crit
    source_name = config.dynamics_source or ("analytic" if model.delta == 0.0 else "lindblad")
    if source_name == "analytic":
        source = analytic_heatmap_source(model)
    else:
        source = lindblad_heatmap_source(model, dt=config.dt)
    times = np.linspace(0.0, config.t_final, config.nt)
    matrix = heatmap_grid(gammas, times, source)
    write_matrix(out, "gamma_over_crit", relative, times, matrix,
                 master_seed=config.seed, format=config.format,
                 config=config.to_dict(), time_unit=config.time_unit)
    return {"n_traj": 1, "rows": int(relative.size)}


_RATE_SOURCES = {
    "pulsed": pulsed_rate_source,
    "continuous_orthogonal": continuous_orthogonal_rate_source,
    "stabilized": stabilized_rate_source,
    "lindblad_fit": lindblad_fit_rate_source,
}


def _run_rates_scan(config: RunConfig, out: str) -> dict:
    model = _model(config)
    crit = critical_rate(model)
    gammas = config.gamma_grid.relative() * crit
    source_name = config.rate_source or (
        "continuous_orthogonal" if model.delta == 0.0 else "stabilized"
    )
    source = _RATE_SOURCES[source_name](model)
    curve = zeno_response_scan(gammas, source)
    located = locate_critical_rate(curve)
    names = ("gamma", "gamma_mix", "response", "regime")
    columns = [curve.gamma_grid, curve.gamma_mix_values, curve.response_values,
               list(curve.regime_labels)]
    _write(config, out, names, columns, {"schema": TABLE_SCHEMA})
    return {
        "n_traj": 1,
        "rate_source": source_name,
        "critical_rate": None if located is None else located.rate,
    }


_HANDLERS = {
    "pulsed_traj": _run_pulsed_traj,
    "continuous_traj": _run_continuous_traj,
    "ensemble_ode": _run_ensemble_ode,
    "poisson_ensemble": _run_poisson_ensemble,
    "sweep_heatmap": _run_sweep_heatmap,
    "rates_scan": _run_rates_scan,
}


def run(config: RunConfig) -> dict:
    """Execute one configured run; returns the summary fields."""
    start = time.perf_counter()
    out = config.output_path()
    extra = _HANDLERS[config.mode](config, out)
    summary = {"mode": config.mode, "out": out,
               "wall_time": time.perf_counter() - start}
    summary.update(extra)
    return summary


def summary_line(summary: dict) -> str:
    """The one-line run report: mode, ensemble size, wall time, output."""
    line = (f"{summary['mode']} M={summary.get('n_traj', 1)} "
            f"wall={summary['wall_time']:.2f}s -> {summary['out']}")
    if summary.get("rate_source"):
        line += f" source={summary['rate_source']}"
    if "critical_rate" in summary:
        located = summary["critical_rate"]
        line += (" critical_gamma=none" if located is None
                 else f" critical_gamma={located:.6g}")
    return line
