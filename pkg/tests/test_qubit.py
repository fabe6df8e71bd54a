"""State representations, propagators, and frame rotations."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from zeno_lab.qubit import (
    ModelParams,
    QubitState,
    apply_unitary,
    bloch_rotation,
    rotate_frame,
    unitary_propagator,
)

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def test_derived_frequencies():
    p = ModelParams(omega_r=1.0, delta=3.0)
    assert_allclose(p.omega**2, p.omega_r**2 + p.delta**2, rtol=1e-12)
    assert_allclose(p.theta, math.atan2(1.0, 3.0), rtol=1e-12)


def test_theta_is_half_pi_on_resonance():
    assert ModelParams(omega_r=2.0, delta=0.0).theta == math.pi / 2


def test_with_gamma_keeps_drive():
    p = ModelParams(omega_r=1.0, delta=0.5).with_gamma(4.0)
    assert p.gamma == 4.0
    assert p.omega_r == 1.0 and p.delta == 0.5


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(omega_r=-1.0)
    with pytest.raises(ValueError):
        ModelParams(omega_r=1.0, gamma=-0.1)
    with pytest.raises(ValueError):
        ModelParams(omega_r=math.nan)


def test_pure_state_norm_enforced():
    with pytest.raises(ValueError):
        QubitState.pure([1.0, 1.0])
    s = QubitState.pure([1.0 / math.sqrt(2), 1j / math.sqrt(2)])
    assert s.is_pure
    assert_allclose(np.linalg.norm(s.bloch()), 1.0, atol=1e-12)


def test_mixed_state_validation():
    with pytest.raises(ValueError):
        QubitState.mixed([[0.9, 0.0], [0.0, 0.2]])  # trace 1.1
    with pytest.raises(ValueError):
        QubitState.mixed([[0.5, 0.4j], [0.4j, 0.5]])  # not Hermitian
    with pytest.raises(ValueError):
        QubitState.mixed([[1.2, 0.0], [0.0, -0.2]])  # negative eigenvalue
    s = QubitState.mixed([[0.75, 0.1], [0.1, 0.25]])
    assert not s.is_pure
    assert np.linalg.norm(s.bloch()) < 1.0


def test_bloch_conventions():
    # index 0 is the measured +1 eigenstate |1>
    assert_allclose(QubitState.excited().bloch(), [0.0, 0.0, 1.0], atol=1e-15)
    assert_allclose(QubitState.ground().bloch(), [0.0, 0.0, -1.0], atol=1e-15)
    assert QubitState.excited().p1 == pytest.approx(1.0)
    plus = QubitState.pure([1.0 / math.sqrt(2), 1.0 / math.sqrt(2)])
    assert_allclose(plus.bloch(), [1.0, 0.0, 0.0], atol=1e-15)


def test_from_bloch_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.uniform(-1.0, 1.0, 3)
        v *= rng.uniform(0.0, 1.0) / np.linalg.norm(v)
        assert_allclose(QubitState.from_bloch(*v).bloch(), v, atol=1e-12)


def test_zero_time_propagator_is_identity():
    u = unitary_propagator(ModelParams(omega_r=1.0, delta=0.4), 0.0)
    assert_allclose(u, np.eye(2), atol=1e-15)


def test_half_rabi_period_empties_excited_state():
    p = ModelParams(omega_r=1.0)
    u = unitary_propagator(p, math.pi)
    final = apply_unitary(QubitState.excited(), u)
    assert final.p1 == pytest.approx(0.0, abs=1e-12)
    # the pi pulse about x maps |1> to -i|0>
    assert_allclose(u @ np.array([1.0, 0.0]), [0.0, -1.0j], atol=1e-12)


def test_full_orbit_returns_minus_identity():
    p = ModelParams(omega_r=1.0, delta=3.0)
    u = unitary_propagator(p, 2.0 * math.pi / p.omega)
    assert_allclose(u, -np.eye(2), atol=1e-12)


def test_propagator_unitary_and_additive():
    p = ModelParams(omega_r=1.0, delta=0.7)
    u1, u2 = unitary_propagator(p, 0.37), unitary_propagator(p, 0.53)
    u12 = unitary_propagator(p, 0.90)
    assert_allclose(u1.conj().T @ u1, np.eye(2), atol=1e-12)
    assert_allclose(u2 @ u1, u12, atol=1e-10)


def test_propagator_rejects_bad_time():
    with pytest.raises(ValueError):
        unitary_propagator(ModelParams(omega_r=1.0), math.inf)


def test_apply_unitary_examples():
    s = QubitState.excited()
    assert_allclose(apply_unitary(s, np.eye(2)).bloch(), s.bloch(), atol=1e-15)
    assert_allclose(apply_unitary(s, SIGMA_X).bloch(), [0.0, 0.0, -1.0], atol=1e-15)


def test_two_quarter_periods_equal_one_half():
    p = ModelParams(omega_r=1.0)
    quarter = unitary_propagator(p, math.pi / 2)
    assert_allclose(quarter @ quarter, unitary_propagator(p, math.pi), atol=1e-12)


def test_apply_unitary_rejects_non_unitary():
    with pytest.raises(ValueError):
        apply_unitary(QubitState.excited(), np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_rotate_frame_identity_and_quarter():
    v = np.array([0.3, -0.2, 0.8])
    assert_allclose(rotate_frame(v, 0.0), v, atol=1e-15)
    assert_allclose(rotate_frame([1.0, 2.0, 3.0], math.pi / 2), [-3.0, 2.0, 1.0], atol=1e-12)


def test_rotate_frame_y_invariant_and_invertible():
    rng = np.random.default_rng(11)
    for _ in range(50):
        v = rng.uniform(-1.0, 1.0, 3)
        theta = rng.uniform(0.0, math.pi)
        w = rotate_frame(v, theta)
        assert w[1] == v[1]
        assert_allclose(rotate_frame(w, -theta), v, atol=1e-12)


def test_bloch_rotation_matches_unitary():
    p = ModelParams(omega_r=1.0, delta=2.0)
    rng = np.random.default_rng(5)
    for t in (0.1, 0.9, 4.0):
        rot = bloch_rotation(p, t)
        u = unitary_propagator(p, t)
        for _ in range(5):
            v = rng.uniform(-1.0, 1.0, 3)
            v /= max(1.0, np.linalg.norm(v))
            evolved = apply_unitary(QubitState.from_bloch(*v), u).bloch()
            assert_allclose(rot @ v, evolved, atol=1e-10)


def test_bloch_length_invariant_under_rotation():
    p = ModelParams(omega_r=1.0, delta=1.5)
    rot = bloch_rotation(p, 0.77)
    v = np.array([0.2, 0.4, -0.5])
    assert_allclose(np.linalg.norm(rot @ v), np.linalg.norm(v), rtol=1e-12)


def test_norm_stable_over_many_compositions():
    # lighter sibling of the 1e6-step check in the validate suite
    u = unitary_propagator(ModelParams(omega_r=1.0, delta=0.4), 0.0123)
    state = QubitState.excited()
    for _ in range(200):
        state = apply_unitary(state, u)
    assert_allclose(np.linalg.norm(state.bloch()), 1.0, atol=1e-12)
