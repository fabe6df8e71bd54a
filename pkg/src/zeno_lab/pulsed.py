"""Pulsed projective measurement of the driven qubit.

A pulse sequence alternates free drive over ``dt_pulse = 1/gamma`` with
instantaneous projective measurements of sigma_z.  Between pulses the
state turns by ``omega * dt_pulse`` about the tilted axis; each pulse
collapses it back onto an eigenstate with the Born probabilities, so a
trajectory is a binary record and the frozen/anti-frozen interplay is
governed by a single per-pulse transition probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RegimeError, ZeroProbabilityError
from .parallel import CHUNK, map_chunks
from .qubit import ModelParams, QubitState, unitary_propagator
from .records import EnsembleResult, TrajectoryRecord, combine_moment_sums
from .seeding import make_generator, trajectory_seed

_REL_TOL = 1e-12


@dataclass(frozen=True)
class PulsedConfig:
    """Configuration of a pulsed measurement run.

    ``dt_pulse`` may be omitted and defaults to ``1/params.gamma``; if
    given explicitly it must agree with that value to relative 1e-12,
    since the pulse rate *is* the measurement rate of the model.
    ``substeps`` sub-samples the coherent arc between pulses for display
    (points per interval); 1 disables interpolation.
    """

    params: ModelParams
    n_pulses: int
    rng_seed: int = 0
    dt_pulse: float | None = None
    substeps: int = 20

    def __post_init__(self):
        if self.params.gamma <= 0:
            raise ValueError("pulsed runs need gamma > 0 (dt_pulse = 1/gamma)")
        if self.n_pulses < 1:
            raise ValueError(f"n_pulses must be >= 1, got {self.n_pulses}")
        if self.substeps < 1:
            raise ValueError(f"substeps must be >= 1, got {self.substeps}")
        expected = 1.0 / self.params.gamma
        if self.dt_pulse is None:
            object.__setattr__(self, "dt_pulse", expected)
        elif not math.isclose(self.dt_pulse, expected, rel_tol=_REL_TOL):
            raise ValueError(
                f"dt_pulse = {self.dt_pulse} inconsistent with 1/gamma = {expected}"
            )


def project(state: QubitState, outcome: int) -> tuple[QubitState, float]:
    """Projective sigma_z measurement conditioned on ``outcome`` (1 or 0).

    Returns the collapsed eigenstate and the Born probability of the
    outcome.  Conditioning on an outcome with probability below 1e-15
    raises :class:`ZeroProbabilityError`.
    """
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    p1 = state.p1
    prob = p1 if outcome == 1 else 1.0 - p1
    if prob < 1e-15:
        raise ZeroProbabilityError(
            f"outcome {outcome} has probability {prob:.3e}; conditioning is undefined"
        )
    post = QubitState.excited() if outcome == 1 else QubitState.ground()
    return post, float(prob)


def jump_probability(params: ModelParams) -> float:
    """Per-pulse transition probability between the measured eigenstates.

    P_jump = sin^2(omega / (2 gamma)) * sin^2(theta).  The transition
    amplitude |<0|U|1>| equals |<1|U|0>|, so the same probability applies
    in both directions.  Detuning suppresses it through the tilt factor
    sin^2(theta) = omega_r^2 / omega^2.
    """
    if params.gamma <= 0:
        raise ValueError("jump_probability requires gamma > 0")
    half_angle = 0.5 * params.omega / params.gamma
    return math.sin(half_angle) ** 2 * math.sin(params.theta) ** 2


def stay_flip_probabilities(params: ModelParams) -> tuple[float, float]:
    """(P_stay, P_flip) for one pulse interval; the pair sums to 1 exactly.

    For delta = 0 this reduces to P_stay = cos^2(omega_r / (2 gamma)).
    """
    p_flip = jump_probability(params)
    return 1.0 - p_flip, p_flip


def analytic_z_pulsed(params: ModelParams, n_pulses: int, delta_t_since: float = 0.0) -> float:
    """Nonselective <sigma_z> after ``n_pulses`` pulses plus a partial interval.

    z = (1 - 2 P_jump)^N * A(dt), with the intra-interval arc
    A(dt) = 1 - 2 sin^2(omega dt / 2) sin^2(theta).  Requires
    0 <= delta_t_since < 1/gamma.
    """
    if n_pulses < 0:
        raise ValueError(f"n_pulses must be >= 0, got {n_pulses}")
    dt_pulse = 1.0 / params.gamma if params.gamma > 0 else math.inf
    if not 0.0 <= delta_t_since < dt_pulse:
        raise ValueError(
            f"delta_t_since must lie in [0, {dt_pulse}), got {delta_t_since}"
        )
    p_jump = jump_probability(params)
    arc = 1.0 - 2.0 * math.sin(0.5 * params.omega * delta_t_since) ** 2 * math.sin(params.theta) ** 2
    return (1.0 - 2.0 * p_jump) ** n_pulses * arc


def gamma_mix_pulsed(params: ModelParams) -> float:
    """Mixing rate of the pulsed sequence, gamma * ln(1 / (1 - 2 P_jump)).

    The per-pulse contraction of z is (1 - 2 P_jump); an exponential
    envelope only exists while P_jump < 1/2, otherwise
    :class:`RegimeError` is raised.
    """
    p_jump = jump_probability(params)
    if p_jump >= 0.5:
        raise RegimeError(
            f"P_jump = {p_jump:.4f} >= 1/2: z alternates sign, no exponential envelope"
        )
    return params.gamma * math.log(1.0 / (1.0 - 2.0 * p_jump))


def record_probability(config: PulsedConfig, record) -> float:
    """Probability of a binary measurement record.

    The record is graded only by its number of flips m (outcomes differing
    from the previous one, with the convention r_0 = 1 for trajectories
    launched from |1>):  P = P_stay^(N - m) * P_flip^m.

    ``record`` may be a :class:`TrajectoryRecord` or any sequence of 0/1
    outcomes.
    """
    outcomes = record.readouts if isinstance(record, TrajectoryRecord) else record
    outcomes = np.asarray(outcomes, dtype=float).reshape(-1)
    if not np.all((outcomes == 0.0) | (outcomes == 1.0)):
        raise ValueError("record outcomes must all be 0 or 1")
    p_stay, p_flip = stay_flip_probabilities(config.params)
    previous = 1.0
    flips = 0
    for r in outcomes:
        if r != previous:
            flips += 1
        previous = r
    return p_stay ** (len(outcomes) - flips) * p_flip ** flips


# -- simulation ------------------------------------------------------------


def _draw_uniform_rows(master_seed: int, start: int, stop: int, n: int) -> np.ndarray:
    """Per-trajectory uniform blocks; row i comes from its own Philox stream."""
    rows = np.empty((stop - start, n))
    for k, index in enumerate(range(start, stop)):
        rows[k] = make_generator(trajectory_seed(master_seed, index)).random(n)
    return rows


def _evolve_pulsed(config: PulsedConfig, a0: complex, b0: complex, uniforms: np.ndarray) -> np.ndarray:
    """Vectorized pulse loop; all arithmetic is elementwise so the result of
    a row does not depend on the batch it ran in."""
    u = unitary_propagator(config.params, config.dt_pulse)
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    n_traj, n_pulses = uniforms.shape
    readouts = np.empty((n_traj, n_pulses), dtype=np.uint8)
    a = np.full(n_traj, a0, dtype=complex)
    b = np.full(n_traj, b0, dtype=complex)
    for j in range(n_pulses):
        a, b = u00 * a + u01 * b, u10 * a + u11 * b
        p1 = a.real**2 + a.imag**2
        hit = uniforms[:, j] < p1
        readouts[:, j] = hit
        a = np.where(hit, 1.0 + 0.0j, 0.0j)
        b = np.where(hit, 0.0j, 1.0 + 0.0j)
    return readouts


def _pulse_times(config: PulsedConfig) -> np.ndarray:
    return config.dt_pulse * np.arange(1, config.n_pulses + 1)


def simulate_pulsed_trajectory(config: PulsedConfig, initial: QubitState | None = None) -> TrajectoryRecord:
    """Sample one pulsed trajectory.

    Draws one uniform variate per pulse (a single block of ``n_pulses``
    values from the Philox stream keyed by ``config.rng_seed``) and
    compares it against the Born probability of outcome 1.  The record
    holds the post-collapse states at the pulse instants; with
    ``config.substeps > 1`` the coherent arcs in between are sub-sampled
    into ``fine_times`` / ``fine_bloch``.
    """
    initial = QubitState.excited() if initial is None else initial
    if not initial.is_pure:
        raise ValueError("pulsed trajectories evolve pure states; pass a pure initial state")
    uniforms = make_generator(config.rng_seed).random(config.n_pulses)[None, :]
    readouts = _evolve_pulsed(config, initial.amplitudes[0], initial.amplitudes[1], uniforms)[0]
    z = 2.0 * readouts.astype(float) - 1.0
    bloch = np.zeros((config.n_pulses, 3))
    bloch[:, 2] = z

    fine_times = fine_bloch = None
    if config.substeps > 1:
        fine_times, fine_bloch = _interpolate_arcs(config, initial, readouts)

    return TrajectoryRecord(
        times=_pulse_times(config),
        bloch=bloch,
        readouts=readouts,
        seed=config.rng_seed,
        fine_times=fine_times,
        fine_bloch=fine_bloch,
    )


def _interpolate_arcs(config: PulsedConfig, initial: QubitState, readouts: np.ndarray):
    """Sub-sample the deterministic drive arcs between recorded collapses."""
    k = config.substeps
    dt = config.dt_pulse
    fractions = np.arange(1, k + 1) / k
    arc_props = [unitary_propagator(config.params, f * dt) for f in fractions]
    times = [np.array([0.0])]
    blochs = [initial.bloch()[None, :]]
    psi = initial.amplitudes
    for i, r in enumerate(readouts):
        seg = np.empty((k, 3))
        for j, u in enumerate(arc_props):
            amp = u @ psi
            cross = np.conj(amp[0]) * amp[1]
            seg[j] = (2.0 * cross.real, 2.0 * cross.imag, abs(amp[0]) ** 2 - abs(amp[1]) ** 2)
        times.append(i * dt + fractions * dt)
        blochs.append(seg)
        psi = np.array([1.0, 0.0], complex) if r else np.array([0.0, 1.0], complex)
    return np.concatenate(times), np.concatenate(blochs)


def simulate_pulsed_batch(
    config: PulsedConfig, initial: QubitState | None = None, n_traj: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Readout matrix of ``n_traj`` independent trajectories.

    Returns ``(times, readouts)`` with ``readouts[i, j]`` the outcome of
    pulse j in trajectory i.  Trajectory i uses the stream key
    ``trajectory_seed(config.rng_seed, i)`` and is identical to a
    standalone :func:`simulate_pulsed_trajectory` run with that seed.
    """
    initial = QubitState.excited() if initial is None else initial
    if not initial.is_pure:
        raise ValueError("pulsed trajectories evolve pure states; pass a pure initial state")
    a0, b0 = initial.amplitudes
    out = np.empty((n_traj, config.n_pulses), dtype=np.uint8)
    for start, stop in ((s, min(s + CHUNK, n_traj)) for s in range(0, n_traj, CHUNK)):
        uniforms = _draw_uniform_rows(config.rng_seed, start, stop, config.n_pulses)
        out[start:stop] = _evolve_pulsed(config, a0, b0, uniforms)
    return _pulse_times(config), out


def simulate_pulsed_ensemble(
    config: PulsedConfig,
    initial: QubitState | None = None,
    n_traj: int = 1000,
    workers: int = 1,
) -> EnsembleResult:
    """Monte Carlo average over ``n_traj`` pulsed trajectories.

    Per-trajectory streams are derived from ``config.rng_seed`` as in
    :func:`simulate_pulsed_batch`; chunk partials are combined in index
    order, so the result does not depend on ``workers``.
    """
    initial = QubitState.excited() if initial is None else initial
    if not initial.is_pure:
        raise ValueError("pulsed trajectories evolve pure states; pass a pure initial state")
    a0, b0 = initial.amplitudes
    n_pulses = config.n_pulses

    def chunk_sums(start, stop):
        uniforms = _draw_uniform_rows(config.rng_seed, start, stop, n_pulses)
        readouts = _evolve_pulsed(config, a0, b0, uniforms)
        z = 2.0 * readouts.astype(float) - 1.0
        total = np.zeros((n_pulses, 3))
        total_sq = np.zeros((n_pulses, 3))
        total[:, 2] = z.sum(axis=0)
        total_sq[:, 2] = (z**2).sum(axis=0)
        return total, total_sq

    partials = map_chunks(chunk_sums, n_traj, workers=workers)
    total = sum(p[0] for p in partials)
    total_sq = sum(p[1] for p in partials)
    return combine_moment_sums(
        _pulse_times(config), total, total_sq, n_traj, config.rng_seed
    )
