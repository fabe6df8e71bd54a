"""Deterministic self-check suite behind the ``validate`` subcommand.

Every check compares simulation output against a closed form or an exact
structural invariant; nothing here is statistical, so a failure always
means a real defect (or a broken install), never bad luck with seeds.
The full suite is budgeted to finish in well under five minutes.
"""

from __future__ import annotations

import itertools
import math
import time

import numpy as np

from .analysis import spectral_overlap
from .continuous import ContinuousConfig, readout_density, simulate_continuous_trajectory
from .ensemble import (
    LindbladParams,
    analytic_solution_orthogonal,
    analytic_z_orthogonal,
    bloch_series,
    gamma0_stabilized,
    gamma_mix_stabilized,
    integrate_master_equation,
    memory_kernel_z,
    xi_rates,
)
from .pulsed import PulsedConfig, analytic_z_pulsed, gamma_mix_pulsed, record_probability
from .qubit import ModelParams, QubitState, rotate_frame, unitary_propagator


class CheckFailure(Exception):
    """Raised by a check whose measured deviation exceeds its bound."""


def _bound(name: str, measured: float, limit: float) -> str:
    if not measured <= limit:
        raise CheckFailure(f"{name} = {measured:.3e} exceeds {limit:.1e}")
    return f"{name} {measured:.2e} <= {limit:.1e}"


def _rel_bound(name: str, value: float, reference: float, limit: float) -> str:
    rel = abs(value - reference) / abs(reference)
    if not rel <= limit:
        raise CheckFailure(
            f"{name}: {value:.6g} vs {reference:.6g}, rel dev {rel:.3e} > {limit:.1e}"
        )
    return f"{name} rel dev {rel:.2e} <= {limit:.1e}"


# -- qubit core ------------------------------------------------------------


def check_propagator_additivity() -> str:
    params = ModelParams(omega_r=1.0, delta=0.7)
    t1, t2 = 0.37, 0.53
    combined = unitary_propagator(params, t1 + t2)
    composed = unitary_propagator(params, t2) @ unitary_propagator(params, t1)
    dev = float(np.max(np.abs(combined - composed)))
    eye_dev = float(np.max(np.abs(combined.conj().T @ combined - np.eye(2))))
    return _bound("max dev", max(dev, eye_dev), 1e-10)


def check_norm_drift_million_steps() -> str:
    u = unitary_propagator(ModelParams(omega_r=1.0, delta=0.4), 0.0123)
    u00, u01 = complex(u[0, 0]), complex(u[0, 1])
    u10, u11 = complex(u[1, 0]), complex(u[1, 1])
    a, b = 1.0 + 0.0j, 0.0 + 0.0j
    for _ in range(1_000_000):
        a, b = u00 * a + u01 * b, u10 * a + u11 * b
    drift = abs(abs(a) ** 2 + abs(b) ** 2 - 1.0)
    return _bound("norm drift", drift, 1e-10)


def check_rotation_round_trip() -> str:
    rng = np.random.default_rng(7)
    worst = 0.0
    for theta in (0.0, 0.3, math.pi / 2, 2.5, math.pi):
        vectors = rng.uniform(-1.0, 1.0, size=(64, 3))
        for vec in vectors:
            back = rotate_frame(rotate_frame(vec, theta), -theta)
            worst = max(worst, float(np.max(np.abs(back - vec))))
    return _bound("round-trip dev", worst, 1e-12)


# -- pulsed measurements ---------------------------------------------------


def check_record_probabilities_sum() -> str:
    config = PulsedConfig(params=ModelParams(omega_r=1.0, gamma=0.8), n_pulses=12)
    total = math.fsum(
        record_probability(config, record)
        for record in itertools.product((0, 1), repeat=12)
    )
    return _bound("|sum - 1|", abs(total - 1.0), 1e-12)


def check_pulsed_closed_form() -> str:
    # Explicit nonselective pulse chain: unitary arc, then projective
    # dephasing, against the (1 - 2 P_jump)^N formula.
    worst = 0.0
    for params in (ModelParams(1.0, 0.0, 0.9), ModelParams(1.0, 2.0, 1.7)):
        u = unitary_propagator(params, 1.0 / params.gamma)
        rho = QubitState.excited().density_matrix()
        for n in range(1, 9):
            rho = u @ rho @ u.conj().T
            rho = np.diag(np.diag(rho))
            z = float(np.real(rho[0, 0] - rho[1, 1]))
            worst = max(worst, abs(z - analytic_z_pulsed(params, n)))
    return _bound("max dev", worst, 1e-12)


# -- weak measurement ------------------------------------------------------


def check_povm_completeness() -> str:
    worst = 0.0
    for strength in (0.01, 0.1, 1.0):
        gamma, dt = 1.0, strength / 2.0
        sigma = 1.0 / math.sqrt(4.0 * gamma * dt)
        grid = np.linspace(-1.0 - 12.0 * sigma, 1.0 + 12.0 * sigma, 200_001)
        for state in (QubitState.excited(), QubitState.ground()):
            density = np.array([readout_density(state, r, gamma, dt) for r in grid])
            worst = max(worst, abs(float(np.trapezoid(density, grid)) - 1.0))
    return _bound("|integral - 1|", worst, 1e-8)


def check_trajectory_norm() -> str:
    config = ContinuousConfig(
        params=ModelParams(omega_r=1.0, gamma=1.0), t_final=30.0, rng_seed=11
    )
    record = simulate_continuous_trajectory(config)
    lengths = np.linalg.norm(record.bloch, axis=1)
    return _bound("max |norm - 1|", float(np.max(np.abs(lengths - 1.0))), 1e-9)


# -- ensemble dynamics -----------------------------------------------------


def check_integrator_rabi() -> str:
    params = LindbladParams(ModelParams(omega_r=1.0))
    times, rhos = integrate_master_equation(params, QubitState.excited(), 6.0 * math.pi, 0.01)
    z = bloch_series(rhos)[:, 2]
    dev = float(np.max(np.abs(z - np.cos(times))))
    return _bound("sup dev", dev, 1e-8)


def check_integrator_closed_forms() -> str:
    worst = 0.0
    for gamma in (0.5, 1.0, 2.0):
        model = ModelParams(omega_r=1.0, gamma=gamma)
        times, rhos = integrate_master_equation(
            LindbladParams(model), QubitState.excited(), 12.0, 0.002
        )
        z = bloch_series(rhos)[:, 2]
        worst = max(worst, float(np.max(np.abs(z - analytic_z_orthogonal(model, times)))))
    return _bound("sup dev", worst, 1e-6)


def check_memory_kernel_vs_integrator() -> str:
    model = ModelParams(omega_r=1.0, delta=3.0, gamma=0.5 * math.sqrt(10.0))
    k_times, k_z = memory_kernel_z(model, 20.0, 0.004)
    times, rhos = integrate_master_equation(
        LindbladParams(model), QubitState.excited(), 20.0, 0.004
    )
    z = bloch_series(rhos)[:, 2]
    dev = float(np.max(np.abs(k_z - np.interp(k_times, times, z))))
    return _bound("sup dev", dev, 1e-3)


def check_integrator_integrity() -> str:
    params = LindbladParams(ModelParams(omega_r=1.0, delta=3.0, gamma=2.0), gamma_one=0.3)
    _, rhos = integrate_master_equation(params, QubitState.excited(), 10.0, 0.004)
    trace_dev = float(np.max(np.abs(np.trace(rhos, axis1=1, axis2=2).real - 1.0)))
    herm_dev = float(np.max(np.abs(rhos - np.conj(np.swapaxes(rhos, 1, 2)))))
    length = float(np.max(np.linalg.norm(bloch_series(rhos), axis=1)))
    detail = _bound("trace dev", trace_dev, 1e-12)
    _bound("hermiticity dev", herm_dev, 1e-12)
    _bound("Bloch length - 1", max(length - 1.0, 0.0), 1e-8)
    return detail + f", max length {length:.12f}"


# -- rate laws -------------------------------------------------------------


def check_sech_symmetry() -> str:
    model = ModelParams(omega_r=1.0, delta=3.0)
    crit = 0.5 * model.omega
    worst = 0.0
    for s in (2.0, 5.0, 10.0):
        high = gamma0_stabilized(model.with_gamma(s * crit))
        low = gamma0_stabilized(model.with_gamma(crit / s))
        worst = max(worst, abs(high - low))
    return _bound("max asymmetry", worst, 1e-12)


def check_spectral_identity() -> str:
    worst = 0.0
    for model in (
        ModelParams(1.0, 0.0, 0.3),
        ModelParams(1.0, 3.0, 1.2),
        ModelParams(1.0, -2.0, 0.7),
    ):
        worst = max(worst, abs(spectral_overlap(model) - gamma0_stabilized(model)))
    return _bound("max dev", worst, 1e-12)


def check_xi_consistency() -> str:
    worst = 0.0
    for model in (ModelParams(1.0, 3.0, 1.0), ModelParams(1.0, 0.5, 2.0)):
        xi0, xi = xi_rates(model)
        worst = max(worst, abs(xi0 * model.omega_r - gamma0_stabilized(model)))
        worst = max(worst, abs(xi * model.omega_r - gamma_mix_stabilized(model)))
    return _bound("max dev", worst, 1e-12)


def check_zeno_asymptote() -> str:
    # gamma = 20 Omega_R: every mixing-rate law approaches Omega_R^2 / 2 gamma.
    gamma = 20.0
    limit_rate = 1.0 / (2.0 * gamma)
    details = []
    for delta in (0.0, 3.0):
        model = ModelParams(omega_r=1.0, delta=delta, gamma=gamma)
        details.append(_rel_bound("pulsed", gamma_mix_pulsed(model), limit_rate, 0.05))
        if delta == 0.0:
            cont = analytic_solution_orthogonal(model).gamma_mix
        else:
            cont = gamma_mix_stabilized(model)
        details.append(_rel_bound("continuous", cont, limit_rate, 0.05))
    return "; ".join(details)


def check_detuned_small_rate_limit() -> str:
    # gamma << Omega_R << Delta: golden-rule rate 2 gamma (Omega_R / Delta)^2.
    model = ModelParams(omega_r=1.0, delta=20.0, gamma=0.05)
    reference = 2.0 * model.gamma * (model.omega_r / model.delta) ** 2
    return _rel_bound("rate", gamma_mix_stabilized(model), reference, 0.05)


CHECKS = (
    ("propagator_additivity", check_propagator_additivity),
    ("norm_drift_million_steps", check_norm_drift_million_steps),
    ("rotation_round_trip", check_rotation_round_trip),
    ("record_probabilities_sum", check_record_probabilities_sum),
    ("pulsed_closed_form", check_pulsed_closed_form),
    ("povm_completeness", check_povm_completeness),
    ("trajectory_norm", check_trajectory_norm),
    ("integrator_rabi", check_integrator_rabi),
    ("integrator_closed_forms", check_integrator_closed_forms),
    ("memory_kernel_vs_integrator", check_memory_kernel_vs_integrator),
    ("integrator_integrity", check_integrator_integrity),
    ("sech_symmetry", check_sech_symmetry),
    ("spectral_identity", check_spectral_identity),
    ("xi_consistency", check_xi_consistency),
    ("zeno_asymptote", check_zeno_asymptote),
    ("detuned_small_rate_limit", check_detuned_small_rate_limit),
)


def run_validation(println=print) -> bool:
    """Run every check, print one PASS/FAIL line each, return overall success."""
    width = max(len(name) for name, _ in CHECKS)
    all_ok = True
    started = time.perf_counter()
    for name, check in CHECKS:
        t0 = time.perf_counter()
        try:
            detail = check()
            status = "PASS"
        except CheckFailure as exc:
            detail, status, all_ok = str(exc), "FAIL", False
        except Exception as exc:  # noqa: BLE001 - a crash is a failure too
            detail, status, all_ok = f"error: {exc!r}", "FAIL", False
        elapsed = time.perf_counter() - t0
        println(f"{status}  {name:<{width}}  {detail}  ({elapsed:.2f}s)")
    total = time.perf_counter() - started
    println(f"{'OK' if all_ok else 'FAILED'}  {len(CHECKS)} checks in {total:.1f}s")
    return all_ok
