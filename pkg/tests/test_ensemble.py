"""Nonselective dynamics: Lindblad integration, closed forms, Poisson unraveling."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from zeno_lab.ensemble import (
    LindbladParams,
    T1Direction,
    UNDERDAMPED,
    CRITICAL,
    OVERDAMPED,
    _event_probability,
    analytic_solution_orthogonal,
    analytic_z_orthogonal,
    bloch_series,
    gamma0_stabilized,
    gamma_mix_stabilized,
    integrate_master_equation,
    lindblad_rhs,
    liouvillian_matrix,
    memory_kernel_coefficient,
    memory_kernel_z,
    poisson_event_intervals,
    poisson_pulsed_step,
    simulate_poisson_ensemble,
    simulate_poisson_trajectory,
    steady_state_bloch,
    xi_rates,
    zeno_response_t1,
)
from zeno_lab.errors import RegimeError
from zeno_lab.qubit import ModelParams, QubitState, unitary_propagator
from zeno_lab.seeding import make_generator


def _params(gamma, delta=0.0, omega_r=1.0):
    return ModelParams(omega_r=omega_r, delta=delta, gamma=gamma)


def _rho(x, y, z):
    return 0.5 * np.array([[1.0 + z, x - 1j * y], [x + 1j * y, 1.0 - z]])


def test_rhs_reduces_to_commutator_without_noise():
    p = LindbladParams(_params(0.0, delta=0.8))
    rho = _rho(0.3, -0.1, 0.4)
    h = 0.5 * np.array([[0.8, 1.0], [1.0, -0.8]], dtype=complex)
    expected = -1j * (h @ rho - rho @ h)
    assert_allclose(lindblad_rhs(rho, p), expected, atol=1e-14)


def test_liouvillian_matches_rhs():
    p = LindbladParams(_params(1.3, delta=0.5), gamma_one=0.4)
    rho = _rho(0.2, 0.3, -0.5)
    flat = liouvillian_matrix(p) @ rho.reshape(-1)
    assert_allclose(flat.reshape(2, 2), lindblad_rhs(rho, p), atol=1e-13)


def test_rhs_is_trace_free_and_hermiticity_preserving():
    p = LindbladParams(_params(0.9, delta=1.1), gamma_one=0.2)
    d = lindblad_rhs(_rho(0.1, 0.6, 0.2), p)
    assert abs(np.trace(d)) < 1e-14
    assert_allclose(d, d.conj().T, atol=1e-14)


def test_integrator_validates_step():
    p = LindbladParams(_params(2.0))
    with pytest.raises(ValueError):
        integrate_master_equation(p, QubitState.excited(), 1.0, 0.5)


def test_integrator_tracks_orthogonal_closed_forms():
    for gamma in (0.5, 1.0, 2.0):
        model = _params(gamma)
        times, rhos = integrate_master_equation(
            LindbladParams(model), QubitState.excited(), 10.0, 0.01
        )
        z = bloch_series(rhos)[:, 2]
        assert np.max(np.abs(z - analytic_z_orthogonal(model, times))) < 1e-6


def test_analytic_solution_regimes():
    under = analytic_solution_orthogonal(_params(0.5))
    assert under.regime == UNDERDAMPED
    assert under.gamma_mix == pytest.approx(0.5, rel=1e-12)
    assert under.osc_frequency == pytest.approx(0.8660254037844386, rel=1e-12)

    crit = analytic_solution_orthogonal(_params(1.0))
    assert crit.regime == CRITICAL

    over = analytic_solution_orthogonal(_params(2.0))
    assert over.regime == OVERDAMPED
    assert over.gamma_plus == pytest.approx(3.732050807568877, rel=1e-12)
    assert over.gamma_minus == pytest.approx(0.2679491924311228, rel=1e-12)
    assert over.gamma_mix == pytest.approx(0.2679491924311228, rel=1e-12)

    with pytest.raises(RegimeError):
        analytic_solution_orthogonal(_params(1.0, delta=0.5))


def test_analytic_solution_pure_dephasing():
    # no drive: z is frozen and only coherences decay at 2 gamma
    sol = analytic_solution_orthogonal(ModelParams(omega_r=0.0, gamma=1.5))
    assert sol.regime == OVERDAMPED
    assert sol.gamma_plus == pytest.approx(3.0, rel=1e-12)
    z = analytic_z_orthogonal(ModelParams(omega_r=0.0, gamma=1.5), np.array([0.0, 2.0]))
    assert_allclose(z, 1.0, atol=1e-15)


def test_analytic_z_critical_form():
    model = _params(1.0)
    times = np.linspace(0.0, 6.0, 61)
    expected = (1.0 + times) * np.exp(-times)
    assert_allclose(analytic_z_orthogonal(model, times), expected, rtol=1e-12)


def test_stabilized_rate_anchors():
    model = _params(1.0, delta=3.0)
    xi0, xi = xi_rates(model)
    assert xi0 == pytest.approx(1.0 / 7.0, rel=1e-12)
    assert gamma_mix_stabilized(model) == pytest.approx(7.0 / 47.0, rel=1e-12)
    # at the critical rate gamma = omega / 2 the golden-rule rate peaks
    peak = _params(0.5 * math.sqrt(10.0), delta=3.0)
    assert gamma0_stabilized(peak) == pytest.approx(0.15811388300841897, rel=1e-12)
    assert gamma_mix_stabilized(peak) == pytest.approx(0.16643566632465155, rel=1e-12)
    assert xi == pytest.approx(gamma_mix_stabilized(model), rel=1e-12)


def test_gamma0_is_a_sech_of_log_rate():
    model_base = ModelParams(omega_r=1.0, delta=3.0)
    omega = model_base.omega
    for gamma in (0.2, 1.0, 2.5, 8.0):
        model = model_base.with_gamma(gamma)
        u = math.log(2.0 * gamma / omega)
        sech = 1.0 / math.cosh(u)
        expected = (model.omega_r**2 / (2.0 * omega)) * sech
        assert gamma0_stabilized(model) == pytest.approx(expected, rel=1e-12)


def test_steady_state_reached_by_integration():
    p = LindbladParams(_params(2.0, delta=1.0), gamma_one=0.7)
    target = steady_state_bloch(p)
    _, rhos = integrate_master_equation(p, QubitState.excited(), 30.0, 0.01)
    assert_allclose(bloch_series(rhos)[-1], target, atol=1e-6)
    no_t1 = LindbladParams(_params(2.0, delta=1.0))
    assert_allclose(steady_state_bloch(no_t1), 0.0, atol=1e-12)


def test_memory_kernel_coefficient_anchor():
    assert memory_kernel_coefficient(_params(1.0, delta=3.0)) == pytest.approx(
        0.6324555320336759, rel=1e-12
    )


def test_memory_kernel_matches_integrator():
    model = _params(1.0, delta=3.0)
    k_times, k_z = memory_kernel_z(model, 10.0, 0.005)
    times, rhos = integrate_master_equation(
        LindbladParams(model), QubitState.excited(), 10.0, 0.005
    )
    z = np.interp(k_times, times, bloch_series(rhos)[:, 2])
    assert np.max(np.abs(k_z - z)) < 1e-3


def test_memory_kernel_validates_step():
    with pytest.raises(ValueError):
        memory_kernel_z(_params(1.0, delta=3.0), 10.0, 0.05)


def test_event_probability_is_exact_expm1():
    assert _event_probability(1.0, 0.01) == pytest.approx(
        0.019801326693244747, rel=1e-15
    )
    with pytest.raises(ValueError):
        _event_probability(10.0, 0.01)  # 2 gamma dt beyond the 0.1 cap


def test_poisson_step_average_is_split_propagator():
    model = _params(1.0)
    dt = 0.01
    rho0 = _rho(0.6, 0.2, 0.5)
    u = unitary_propagator(model, dt)
    rotated = u @ rho0 @ u.conj().T
    q = _event_probability(model.gamma, dt)
    target = (1.0 - q) * rotated + q * np.diag(np.diag(rotated))

    rng = make_generator(99)
    mean = np.zeros((2, 2), dtype=complex)
    n = 20000
    for _ in range(n):
        mean += poisson_pulsed_step(rho0, model, dt, rng)
    mean /= n
    # z carries no sampling noise; the coherences do
    assert_allclose(mean.diagonal(), target.diagonal(), atol=1e-12)
    assert_allclose(mean[0, 1], target[0, 1], atol=3e-3)


def test_poisson_trajectory_stride_consistency():
    model = _params(2.0)
    fine = simulate_poisson_trajectory(model, 4.0, 0.01, rng_seed=8)
    coarse = simulate_poisson_trajectory(model, 4.0, 0.01, rng_seed=8, record_stride=5)
    assert coarse.times.shape == (80,)
    assert np.sum(coarse.readouts) == np.sum(fine.readouts)
    assert_allclose(coarse.bloch, fine.bloch[4::5], atol=1e-14)


def test_poisson_ensemble_converges_to_master_equation():
    model = _params(2.0)
    result = simulate_poisson_ensemble(model, 6.0, 0.01, n_traj=3000, master_seed=2)
    times, rhos = integrate_master_equation(
        LindbladParams(model), QubitState.excited(), 6.0, 0.01
    )
    z = np.interp(result.times, times, bloch_series(rhos)[:, 2])
    dev = np.abs(result.z - z)
    assert np.all(dev <= 5.0 * result.z_err + 2e-3)


def test_poisson_ensemble_worker_invariance():
    model = _params(1.0)
    serial = simulate_poisson_ensemble(model, 2.0, 0.01, n_traj=2500, master_seed=4, workers=1)
    threaded = simulate_poisson_ensemble(model, 2.0, 0.01, n_traj=2500, master_seed=4, workers=4)
    assert np.array_equal(serial.mean_bloch, threaded.mean_bloch)


def test_poisson_intervals_are_grid_exponential():
    model = _params(1.0)
    intervals = poisson_event_intervals(model, 40.0, 0.002, n_traj=50, master_seed=0)
    assert intervals.size > 2000
    assert_allclose(np.round(intervals / 0.002), intervals / 0.002, atol=1e-9)
    assert np.mean(intervals) == pytest.approx(0.5, rel=0.05)


def test_t1_direction_sets_decay_target():
    down = LindbladParams(ModelParams(0.0, 0.0, 0.0), gamma_one=1.0,
                          t1_jump_direction=T1Direction.TOWARD_STATE_0)
    _, rhos = integrate_master_equation(down, QubitState.excited(), 1.0, 0.001)
    assert bloch_series(rhos)[-1, 2] == pytest.approx(2.0 / math.e - 1.0, abs=1e-9)

    up = LindbladParams(ModelParams(0.0, 0.0, 0.0), gamma_one=1.0,
                        t1_jump_direction=T1Direction.TOWARD_STATE_1)
    _, rhos = integrate_master_equation(up, QubitState.ground(), 1.0, 0.001)
    assert bloch_series(rhos)[-1, 2] == pytest.approx(1.0 - 2.0 / math.e, abs=1e-9)

    assert T1Direction("toward_state_0") is T1Direction.TOWARD_STATE_0


def test_t1_response_scan_is_flat_without_drive():
    p = LindbladParams(ModelParams(0.0, 0.0, 0.0), gamma_one=0.5)
    scan = zeno_response_t1(p, [1.0, 2.0, 4.0])
    assert_allclose(scan.rates, 0.5, rtol=1e-3)
    assert np.max(np.abs(scan.response)) < 1e-3
