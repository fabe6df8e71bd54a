"""Continuous weak measurement: Gaussian readout, Bayesian update, diffusive SSE.

Each time step of length ``dt_step`` couples the qubit to a Gaussian
pointer: outcome densities P(r | 1) and P(r | 0) are normal with means
+1 / -1 and variance 1 / (4 gamma dt).  Conditioning on the sampled
readout through the corresponding Kraus pair and renormalizing produces
the diffusive trajectory; in the small-step limit this composition is the
Euler scheme of the stochastic Schroedinger equation

    d|psi> = (-i H - gamma / 2) |psi> dt + sqrt(gamma) sigma_z |psi> dW,

with innovation dW = sqrt(4 gamma) (r - <sigma_z>) dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, ReadoutUnderflowError
from .parallel import CHUNK, map_chunks
from .qubit import ModelParams, QubitState, SIGMA_X, SIGMA_Z, bloch_rotation, unitary_propagator
from .records import EnsembleResult, TrajectoryRecord, combine_moment_sums
from .seeding import make_generator, trajectory_seed

_MAX_STEPS = 1_000_000_000
_DT_SLACK = 1.0 + 1e-9
_LOG_FLOOR = math.log(1e-300)


class ReadoutSample(NamedTuple):
    """One weak-measurement readout: the value drawn and its step index."""

    value: float
    step: int = 0


@dataclass(frozen=True)
class ContinuousConfig:
    """Configuration of a continuous weak-measurement run.

    ``dt_step`` defaults to min(0.05 / omega, 0.05 / gamma) so that both
    the drive angle and the measurement strength per step stay small;
    explicit values must satisfy dt * omega <= 0.05 and dt * gamma <= 0.05.
    ``filter_tau`` is a display time constant for the optional
    exponentially averaged copy of the readout; it never feeds back on
    the dynamics.
    """

    params: ModelParams
    t_final: float
    dt_step: float | None = None
    rng_seed: int = 0
    filter_tau: float | None = None

    def __post_init__(self):
        if self.params.gamma <= 0:
            raise ValueError("continuous measurement needs gamma > 0")
        if not (math.isfinite(self.t_final) and self.t_final > 0):
            raise ValueError(f"t_final must be positive and finite, got {self.t_final}")
        if self.dt_step is None:
            scales = [s for s in (self.params.omega, self.params.gamma) if s > 0]
            if not scales:
                raise ConfigError("no time scale to derive dt_step from; give it explicitly")
            object.__setattr__(self, "dt_step", 0.05 / max(scales))
        dt = self.dt_step
        if not (math.isfinite(dt) and dt > 0):
            raise ValueError(f"dt_step must be positive and finite, got {dt}")
        if dt * self.params.omega > 0.05 * _DT_SLACK:
            raise ValueError(f"dt_step * omega = {dt * self.params.omega:.4g} exceeds 0.05")
        if dt * self.params.gamma > 0.05 * _DT_SLACK:
            raise ValueError(f"dt_step * gamma = {dt * self.params.gamma:.4g} exceeds 0.05")
        if self.filter_tau is not None and self.filter_tau <= 0:
            raise ValueError(f"filter_tau must be positive, got {self.filter_tau}")
        if self.n_steps > _MAX_STEPS:
            raise ConfigError(
                f"{self.n_steps} steps requested; the cap is {_MAX_STEPS}"
            )

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt_step)))


def gaussian_kraus(r: float, gamma: float, dt: float) -> np.ndarray:
    """Diagonal Kraus operator of the readout value ``r``.

    M_r = diag(sqrt(P(r | 1)), sqrt(P(r | 0))) with the normal outcome
    densities of variance 1 / (4 gamma dt); the pair integrates to the
    identity, int M_r^dag M_r dr = I.
    """
    if not gamma * dt > 0:
        raise ValueError("gaussian_kraus requires gamma * dt > 0")
    pref = (2.0 * gamma * dt / math.pi) ** 0.25
    w1 = pref * math.exp(-gamma * dt * (r - 1.0) ** 2)
    w0 = pref * math.exp(-gamma * dt * (r + 1.0) ** 2)
    return np.array([[w1, 0.0], [0.0, w0]], dtype=complex)


def readout_density(state: QubitState, r: float, gamma: float, dt: float) -> float:
    """Total outcome density P(r) = P_1 P(r | 1) + P_0 P(r | 0)."""
    if not gamma * dt > 0:
        raise ValueError("readout_density requires gamma * dt > 0")
    p1 = state.p1
    log_pref = 0.5 * math.log(2.0 * gamma * dt / math.pi)
    e1 = -2.0 * gamma * dt * (r - 1.0) ** 2
    e0 = -2.0 * gamma * dt * (r + 1.0) ** 2
    m = max(e1, e0)
    mix = p1 * math.exp(e1 - m) + (1.0 - p1) * math.exp(e0 - m)
    if mix <= 0.0 or log_pref + m + math.log(mix) < _LOG_FLOOR:
        return 0.0
    return math.exp(log_pref + m) * mix


def sample_readout(state: QubitState, gamma: float, dt: float, rng: np.random.Generator,
                   step: int = 0) -> ReadoutSample:
    """Draw one readout from the two-Gaussian mixture of the current state.

    Consumes one uniform (eigenstate branch) and one standard normal
    (pointer noise) from ``rng``, in that order.
    """
    if not gamma * dt > 0:
        raise ValueError("sample_readout requires gamma * dt > 0")
    mu = 1.0 if rng.random() < state.p1 else -1.0
    sigma = 1.0 / math.sqrt(4.0 * gamma * dt)
    return ReadoutSample(value=mu + sigma * rng.standard_normal(), step=step)


def bayesian_update(state: QubitState, r, gamma: float, dt: float) -> QubitState:
    """Condition the state on a readout value via the Gaussian Kraus pair.

    ``r`` may be a float or a :class:`ReadoutSample`.  Raises
    :class:`ReadoutUnderflowError` when the total outcome density falls
    below 1e-300, where renormalization is meaningless.
    """
    value = float(r.value) if isinstance(r, ReadoutSample) else float(r)
    if readout_density(state, value, gamma, dt) <= 0.0:
        raise ReadoutUnderflowError(
            f"readout {value} has vanishing density for this state; update undefined"
        )
    e1 = -gamma * dt * (value - 1.0) ** 2
    e0 = -gamma * dt * (value + 1.0) ** 2
    m = max(e1, e0)
    w1, w0 = math.exp(e1 - m), math.exp(e0 - m)
    if state.is_pure:
        a, b = state.amplitudes
        a, b = a * w1, b * w0
        norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        return QubitState(amplitudes=np.array([a / norm, b / norm]), _validate=False)
    weights = np.array([[w1 * w1, w1 * w0], [w0 * w1, w0 * w0]])
    rho = state.rho * weights
    return QubitState(rho=rho / np.trace(rho).real, _validate=False)


def sse_step_euler(state: QubitState, dW: float, params: ModelParams, dt: float) -> QubitState:
    """One Euler step of the diffusive stochastic Schroedinger equation.

    psi <- psi + (-i H - gamma / 2) psi dt + sqrt(gamma) sigma_z psi dW,
    renormalized.  Agrees with the unitary + Bayesian-update composition
    to O(dt^(3/2)) per step for the matching innovation.
    """
    if not state.is_pure:
        raise ValueError("the SSE propagates pure states")
    h = 0.5 * (params.omega_r * SIGMA_X + params.delta * SIGMA_Z)
    psi = state.amplitudes
    dpsi = (-1j * (h @ psi) - 0.5 * params.gamma * psi) * dt \
        + math.sqrt(params.gamma) * (SIGMA_Z @ psi) * dW
    psi = psi + dpsi
    norm = math.sqrt(float(np.sum(np.abs(psi) ** 2)))
    return QubitState(amplitudes=psi / norm, _validate=False)


def exponential_filter(values, dt: float, tau: float) -> np.ndarray:
    """Single-pole exponential moving average with time constant ``tau``.

    Display smoothing only; the first sample seeds the filter state.
    """
    if tau <= 0 or dt <= 0:
        raise ValueError("exponential_filter requires dt > 0 and tau > 0")
    values = np.asarray(values, dtype=float).reshape(-1)
    alpha = 1.0 - math.exp(-dt / tau)
    out = np.empty_like(values)
    acc = 0.0
    for i, v in enumerate(values):
        acc = v if i == 0 else acc + alpha * (v - acc)
        out[i] = acc
    return out


def wiener_increments(record: TrajectoryRecord, params: ModelParams,
                      initial: QubitState | None = None) -> np.ndarray:
    """Reconstruct the innovation increments dW from a recorded trajectory.

    dW_i = sqrt(4 gamma) (r_i - z_pre_i) dt, where z_pre_i is <sigma_z>
    just after the coherent step and before the i-th readout; it is
    recovered by rotating the previous post-measurement Bloch vector.
    """
    initial = QubitState.excited() if initial is None else initial
    if len(record.times) < 1:
        return np.zeros(0)
    dt = record.times[0] if len(record.times) == 1 else record.times[1] - record.times[0]
    rot = bloch_rotation(params, dt)
    previous = np.vstack([initial.bloch()[None, :], record.bloch[:-1]])
    z_pre = previous @ rot[2]
    return math.sqrt(4.0 * params.gamma) * (record.readouts - z_pre) * dt


# -- simulation ------------------------------------------------------------


def _draw_noise_rows(master_seed: int, start: int, stop: int, n: int):
    """Per-trajectory noise blocks: a uniform block then a normal block."""
    uniforms = np.empty((stop - start, n))
    normals = np.empty((stop - start, n))
    for k, index in enumerate(range(start, stop)):
        rng = make_generator(trajectory_seed(master_seed, index))
        uniforms[k] = rng.random(n)
        normals[k] = rng.standard_normal(n)
    return uniforms, normals


def _evolve_continuous(config: ContinuousConfig, a0: complex, b0: complex,
                       uniforms: np.ndarray, normals: np.ndarray):
    """Vectorized step loop; elementwise arithmetic keeps each row independent
    of its batch, so batched and standalone runs agree bit for bit."""
    params = config.params
    dt = config.dt_step
    gamma = params.gamma
    u = unitary_propagator(params, dt)
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    sigma = 1.0 / math.sqrt(4.0 * gamma * dt)
    gd = gamma * dt
    n_traj, n_steps = uniforms.shape
    readouts = np.empty((n_traj, n_steps))
    bloch = np.empty((n_traj, n_steps, 3))
    a = np.full(n_traj, a0, dtype=complex)
    b = np.full(n_traj, b0, dtype=complex)
    for j in range(n_steps):
        a, b = u00 * a + u01 * b, u10 * a + u11 * b
        p1 = np.clip(a.real**2 + a.imag**2, 0.0, 1.0)
        mu = np.where(uniforms[:, j] < p1, 1.0, -1.0)
        r = mu + sigma * normals[:, j]
        e1 = -gd * (r - 1.0) ** 2
        e0 = -gd * (r + 1.0) ** 2
        m = np.maximum(e1, e0)
        a = a * np.exp(e1 - m)
        b = b * np.exp(e0 - m)
        inv = 1.0 / np.sqrt(a.real**2 + a.imag**2 + b.real**2 + b.imag**2)
        a = a * inv
        b = b * inv
        cross = np.conj(a) * b
        readouts[:, j] = r
        bloch[:, j, 0] = 2.0 * cross.real
        bloch[:, j, 1] = 2.0 * cross.imag
        bloch[:, j, 2] = a.real**2 + a.imag**2 - b.real**2 - b.imag**2
    return readouts, bloch


def _step_times(config: ContinuousConfig) -> np.ndarray:
    return config.dt_step * np.arange(1, config.n_steps + 1)


def _pure_initial(initial: QubitState | None) -> tuple[complex, complex]:
    initial = QubitState.excited() if initial is None else initial
    if not initial.is_pure:
        raise ValueError("diffusive trajectories evolve pure states; pass a pure initial state")
    return initial.amplitudes[0], initial.amplitudes[1]


def simulate_continuous_trajectory(config: ContinuousConfig,
                                   initial: QubitState | None = None) -> TrajectoryRecord:
    """Sample one diffusive trajectory.

    Per step: coherent propagation over ``dt_step``, then a readout drawn
    from the state's Gaussian mixture, then the Bayesian update.  The
    noise for step j is ``uniforms[j]`` and ``normals[j]``, drawn as two
    blocks from the Philox stream keyed by ``config.rng_seed``.  Raw
    readouts are stored unfiltered.
    """
    a0, b0 = _pure_initial(initial)
    rng = make_generator(config.rng_seed)
    n = config.n_steps
    uniforms = rng.random(n)[None, :]
    normals = rng.standard_normal(n)[None, :]
    readouts, bloch = _evolve_continuous(config, a0, b0, uniforms, normals)
    return TrajectoryRecord(
        times=_step_times(config),
        bloch=bloch[0],
        readouts=readouts[0],
        seed=config.rng_seed,
    )


def simulate_continuous_batch(config: ContinuousConfig, initial: QubitState | None = None,
                              n_traj: int = 1):
    """Stacked trajectories: ``(times, readouts (M, N), bloch (M, N, 3))``.

    Row i reproduces a standalone run seeded with
    ``trajectory_seed(config.rng_seed, i)``.  Memory grows as M * N; use
    :func:`simulate_continuous_ensemble` for large averages.
    """
    a0, b0 = _pure_initial(initial)
    n = config.n_steps
    readouts = np.empty((n_traj, n))
    bloch = np.empty((n_traj, n, 3))
    for start, stop in ((s, min(s + CHUNK, n_traj)) for s in range(0, n_traj, CHUNK)):
        uniforms, normals = _draw_noise_rows(config.rng_seed, start, stop, n)
        readouts[start:stop], bloch[start:stop] = _evolve_continuous(
            config, a0, b0, uniforms, normals
        )
    return _step_times(config), readouts, bloch


def simulate_continuous_ensemble(config: ContinuousConfig, initial: QubitState | None = None,
                                 n_traj: int = 1000, workers: int = 1) -> EnsembleResult:
    """Monte Carlo mean Bloch vector over ``n_traj`` diffusive trajectories.

    Chunk partials are combined in index order; the result is independent
    of the worker count.
    """
    a0, b0 = _pure_initial(initial)
    n = config.n_steps

    def chunk_sums(start, stop):
        uniforms, normals = _draw_noise_rows(config.rng_seed, start, stop, n)
        _, bloch = _evolve_continuous(config, a0, b0, uniforms, normals)
        return bloch.sum(axis=0), (bloch**2).sum(axis=0)

    partials = map_chunks(chunk_sums, n_traj, workers=workers)
    total = sum(p[0] for p in partials)
    total_sq = sum(p[1] for p in partials)
    return combine_moment_sums(
        _step_times(config), total, total_sq, n_traj, config.rng_seed
    )
