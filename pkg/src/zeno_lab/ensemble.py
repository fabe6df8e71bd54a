"""Nonselective dynamics of the measured, driven qubit.

The ensemble average over measurement outcomes obeys the Lindblad
equation (hbar = 1)

    drho/dt = -i [H, rho] + gamma (sigma_z rho sigma_z - rho)
              + gamma_one (L rho L^dag - {L^dag L, rho} / 2),

whose dephasing half is solved here four independent ways: fixed-step
RK4 on the full master equation, closed forms for the orthogonal
(delta = 0) damped oscillator, a memory-kernel integro-differential
equation for the measured population, and a Monte Carlo average over
Poisson-randomized projection events.  The optional gamma_one term is
plain T1 relaxation; its jump direction is configurable because the
operator ordering convention is ambiguous in the usual shorthand, and
the default relaxes toward |0>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, PositivityError, RegimeError
from .fitting import envelope_rate, response_from_rates
from .parallel import CHUNK, map_chunks
from .qubit import ModelParams, QubitState, bloch_rotation, unitary_propagator
from .records import EnsembleResult, TrajectoryRecord, combine_moment_sums
from .seeding import make_generator, trajectory_seed

UNDERDAMPED = "underdamped"
CRITICAL = "critical"
OVERDAMPED = "overdamped"

_BLOCH_TOL = 1e-8
_MAX_KERNEL_STEPS = 200_000


class T1Direction(Enum):
    """Jump direction of the optional T1 term."""

    TOWARD_STATE_0 = "toward_state_0"
    TOWARD_STATE_1 = "toward_state_1"


@dataclass(frozen=True)
class LindbladParams:
    """Model parameters plus the optional Markovian T1 channel."""

    model: ModelParams
    gamma_one: float = 0.0
    t1_jump_direction: T1Direction = T1Direction.TOWARD_STATE_0

    def __post_init__(self):
        if not (math.isfinite(self.gamma_one) and self.gamma_one >= 0):
            raise ValueError(f"gamma_one must be finite and >= 0, got {self.gamma_one}")


def _as_lindblad(p) -> LindbladParams:
    return p if isinstance(p, LindbladParams) else LindbladParams(model=p)


@dataclass(frozen=True)
class AnalyticSolution:
    """Eigenrates of the orthogonal damped oscillator for z(t).

    ``gamma_plus >= gamma_minus`` are the decay eigenrates (equal, and
    equal to gamma, in the underdamped and critical regimes where the
    residual oscillation frequency ``osc_frequency`` is real);
    ``gamma_mix`` is the envelope rate of the measured population and
    ``transient = gamma_plus - gamma_minus`` the fast initial rate.
    """

    regime: str
    gamma_plus: float
    gamma_minus: float
    gamma_mix: float
    transient: float
    osc_frequency: float = 0.0


# -- master equation -------------------------------------------------------


def _t1_jump(direction: T1Direction) -> np.ndarray:
    # basis order (|1>, |0>)
    if direction is T1Direction.TOWARD_STATE_0:
        return np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    return np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def lindblad_rhs(rho: np.ndarray, p) -> np.ndarray:
    """Right-hand side of the master equation for a 2x2 density matrix."""
    p = _as_lindblad(p)
    m = p.model
    rho = np.asarray(rho, dtype=complex)
    h = 0.5 * np.array([[m.delta, m.omega_r], [m.omega_r, -m.delta]], dtype=complex)
    out = -1j * (h @ rho - rho @ h)
    if m.gamma > 0:
        sz = np.array([1.0, -1.0])
        out += m.gamma * (rho * np.outer(sz, sz) - rho)
    if p.gamma_one > 0:
        jump = _t1_jump(p.t1_jump_direction)
        jj = jump.conj().T @ jump
        out += p.gamma_one * (jump @ rho @ jump.conj().T - 0.5 * (jj @ rho + rho @ jj))
    return out


def liouvillian_matrix(p) -> np.ndarray:
    """4x4 generator acting on vec(rho) = (rho00, rho01, rho10, rho11)."""
    p = _as_lindblad(p)
    cols = []
    for k in range(4):
        basis = np.zeros(4, dtype=complex)
        basis[k] = 1.0
        cols.append(lindblad_rhs(basis.reshape(2, 2), p).reshape(4))
    return np.column_stack(cols)


def _hermitize_vec(v: np.ndarray) -> np.ndarray:
    off = 0.5 * (v[1] + np.conj(v[2]))
    return np.array([v[0].real, off, np.conj(off), v[3].real], dtype=complex)


def integrate_master_equation(p, initial: QubitState, t_final: float, dt: float):
    """Fixed-step RK4 integration of the master equation.

    Parameters
    ----------
    p : LindbladParams or ModelParams
    initial : QubitState
    t_final, dt : float
        ``dt * max(omega, 2 gamma, gamma_one)`` must not exceed 0.05.

    Returns
    -------
    (times, rhos)
        Arrays of shape (n + 1,) and (n + 1, 2, 2) including t = 0.

    Each step re-hermitizes, renormalizes the trace, and monitors
    positivity: a Bloch length beyond 1 + 2e-8 raises
    :class:`PositivityError` with a suggested smaller step.
    """
    p = _as_lindblad(p)
    if not (dt > 0 and t_final > 0):
        raise ValueError("t_final and dt must be positive")
    stiffness = max(p.model.omega, 2.0 * p.model.gamma, p.gamma_one)
    if dt * stiffness > 0.05 * (1.0 + 1e-9):
        raise ValueError(
            f"dt * max(omega, 2*gamma, gamma_one) = {dt * stiffness:.4g} exceeds 0.05"
        )
    n_steps = max(1, int(round(t_final / dt)))
    if n_steps > 10_000_000:
        raise ConfigError(f"{n_steps} RK4 steps requested; refusing past 1e7")

    lv = liouvillian_matrix(p)
    # the generator is constant, so the classical RK4 update collapses to
    # one application of the degree-4 Taylor polynomial of exp(dt L)
    a = dt * lv
    a2 = a @ a
    step = np.eye(4, dtype=complex) + a + a2 / 2.0 + (a2 @ a) / 6.0 + (a2 @ a2) / 24.0
    v = initial.density_matrix().reshape(4)
    rhos = np.empty((n_steps + 1, 2, 2), dtype=complex)
    rhos[0] = v.reshape(2, 2)
    for i in range(n_steps):
        v = step @ v
        v = _hermitize_vec(v)
        trace = v[0].real + v[3].real
        v = v / trace
        x = 2.0 * v[1].real
        y = -2.0 * v[1].imag
        z = (v[0] - v[3]).real
        if x * x + y * y + z * z > 1.0 + 2.0 * _BLOCH_TOL:
            raise PositivityError(
                f"state left the Bloch ball at step {i + 1}; retry with dt = {dt / 2:.3g}",
                dt=dt,
                suggested_dt=dt / 2,
            )
        rhos[i + 1] = v.reshape(2, 2)
    times = dt * np.arange(n_steps + 1)
    return times, rhos


def bloch_series(rhos: np.ndarray) -> np.ndarray:
    """Bloch coordinates of a (n, 2, 2) density-matrix series."""
    rhos = np.asarray(rhos, dtype=complex)
    out = np.empty(rhos.shape[:-2] + (3,))
    out[..., 0] = 2.0 * rhos[..., 0, 1].real
    out[..., 1] = -2.0 * rhos[..., 0, 1].imag
    out[..., 2] = (rhos[..., 0, 0] - rhos[..., 1, 1]).real
    return out


def _bloch_generator(p: LindbladParams):
    """Affine Bloch-vector form dr/dt = M r + c of the master equation."""
    m = p.model
    g1 = p.gamma_one
    mat = np.array(
        [
            [-2.0 * m.gamma - 0.5 * g1, -m.delta, 0.0],
            [m.delta, -2.0 * m.gamma - 0.5 * g1, -m.omega_r],
            [0.0, m.omega_r, -g1],
        ]
    )
    sign = -1.0 if p.t1_jump_direction is T1Direction.TOWARD_STATE_0 else 1.0
    drift = np.array([0.0, 0.0, sign * g1])
    return mat, drift


def steady_state_bloch(p) -> np.ndarray:
    """Stationary Bloch vector; the zero vector when the drift vanishes."""
    p = _as_lindblad(p)
    mat, drift = _bloch_generator(p)
    if np.all(drift == 0.0):
        return np.zeros(3)
    return np.linalg.solve(mat, -drift)


# -- closed forms, orthogonal arrangement ----------------------------------


def analytic_solution_orthogonal(model: ModelParams) -> AnalyticSolution:
    """Eigenrates of z'' + 2 gamma z' + omega_r^2 z = 0 (delta = 0 only)."""
    if model.delta != 0.0:
        raise RegimeError("closed-form damped oscillator requires delta = 0")
    g, w = model.gamma, model.omega_r
    if w == 0.0:
        return AnalyticSolution(OVERDAMPED, 2.0 * g, 0.0, 0.0, 2.0 * g)
    if abs(g - w) <= 1e-12 * w:
        return AnalyticSolution(CRITICAL, g, g, g, 0.0)
    if g < w:
        return AnalyticSolution(UNDERDAMPED, g, g, g, 0.0, math.sqrt(w * w - g * g))
    root = math.sqrt(g * g - w * w)
    return AnalyticSolution(OVERDAMPED, g + root, g - root, g - root, 2.0 * root)


def analytic_z_orthogonal(model: ModelParams, times) -> np.ndarray:
    """Closed-form z(t) from |1> for delta = 0, all damping regimes."""
    sol = analytic_solution_orthogonal(model)
    t = np.asarray(times, dtype=float)
    g = model.gamma
    if sol.regime == UNDERDAMPED:
        if g == 0.0:
            return np.cos(model.omega_r * t)
        wd = sol.osc_frequency
        return np.exp(-g * t) * (np.cos(wd * t) + (g / wd) * np.sin(wd * t))
    if sol.regime == CRITICAL:
        return np.exp(-g * t) * (1.0 + g * t)
    gp, gm = sol.gamma_plus, sol.gamma_minus
    if gp == gm:  # omega_r = 0: z is conserved by pure dephasing
        return np.ones_like(t)
    return (gp * np.exp(-gm * t) - gm * np.exp(-gp * t)) / (gp - gm)


# -- closed forms, stabilized arrangement ----------------------------------


def gamma0_stabilized(model: ModelParams) -> float:
    """Golden-rule mixing rate 2 gamma omega_r^2 / (omega^2 + (2 gamma)^2).

    A Lorentzian in the measurement rate, maximal at gamma = omega / 2;
    on a logarithmic gamma axis it is the symmetric curve
    (omega_r^2 / (2 omega)) * sech(ln(2 gamma / omega)).
    """
    w = model.omega
    denom = w * w + 4.0 * model.gamma**2
    if denom == 0.0:
        return 0.0
    return 2.0 * model.gamma * model.omega_r**2 / denom


def gamma_mix_stabilized(model: ModelParams) -> float:
    """Self-consistent mixing rate gamma_0 / (1 - 2 (gamma_0 / omega_r)^2).

    The correction resums the feedback of the decaying population on
    itself; the denominator stays >= 1/2 for any physical parameters, but
    a non-positive value (possible only through rounding at the extreme
    edge) raises :class:`RegimeError`.
    """
    if model.omega_r == 0.0:
        return 0.0
    ratio = gamma0_stabilized(model) / model.omega_r
    denom = 1.0 - 2.0 * ratio * ratio
    if denom <= 0.0:
        raise RegimeError(f"self-consistency denominator {denom:.3e} is not positive")
    return gamma0_stabilized(model) / denom


def xi_rates(model: ModelParams) -> tuple[float, float]:
    """Dimensionless mixing rates (xi_0, xi) in units of omega_r.

    xi_0 = (g / (1 + g^2)) sin(theta) with g = 2 gamma / omega, so
    gamma_0 = xi_0 * omega_r exactly; xi = xi_0 / (1 - 2 xi_0^2) is the
    self-consistent value with gamma_mix = xi * omega_r.
    """
    if model.omega == 0.0:
        raise ValueError("xi_rates undefined for omega = 0")
    g = 2.0 * model.gamma / model.omega
    xi0 = g / (1.0 + g * g) * math.sin(model.theta)
    xi = xi0 / (1.0 - 2.0 * xi0 * xi0)
    return xi0, xi


# -- memory-kernel form ----------------------------------------------------


def memory_kernel_coefficient(model: ModelParams) -> float:
    """Convolution strength A = 2 gamma omega_r^2 / omega (0 when omega = 0)."""
    if model.omega == 0.0:
        return 0.0
    return 2.0 * model.gamma * model.omega_r**2 / model.omega


def memory_kernel_z(model: ModelParams, t_final: float, dt: float):
    """Integro-differential solution for z(t) from |1>.

    Eliminating the tilted-frame coherence exactly gives

        dz/dt = -(omega_r^2 / omega) k(t)
                - (2 gamma omega_r^2 / omega) int_0^t k(tau) z(t - tau) dtau,

    with kernel k(tau) = exp(-2 gamma tau) sin(omega tau).  The first
    term is the initial coherence of |1> in the tilted frame propagating
    forward; without it the gamma -> 0 limit would freeze instead of
    reproducing the coherent arc.  Integration is Heun's method with a
    trapezoidal history convolution; ``dt * max(omega, 2 gamma)`` must
    not exceed 0.02 so both timescales are resolved.

    Returns ``(times, z)`` including t = 0.
    """
    if not (dt > 0 and t_final > 0):
        raise ValueError("t_final and dt must be positive")
    scale = max(model.omega, 2.0 * model.gamma)
    if dt * scale > 0.02 * (1.0 + 1e-9):
        raise ValueError(f"dt * max(omega, 2*gamma) = {dt * scale:.4g} exceeds 0.02")
    n_steps = max(1, int(round(t_final / dt)))
    if n_steps > _MAX_KERNEL_STEPS:
        raise ConfigError(
            f"{n_steps} kernel steps requested (O(n^2) work); refusing past {_MAX_KERNEL_STEPS}"
        )
    w = model.omega
    coef = 0.0 if model.omega_r == 0.0 else model.omega_r**2 / w
    a_coef = memory_kernel_coefficient(model)

    tau = dt * np.arange(n_steps + 2)
    kernel = np.exp(-2.0 * model.gamma * tau) * np.sin(w * tau)

    z = np.empty(n_steps + 1)
    z[0] = 1.0

    def deriv(n: int, zn_hist: np.ndarray) -> float:
        # trapezoid over tau = 0 .. t_n of k(tau) z(t_n - tau); k(0) = 0
        if n == 0:
            conv = 0.0
        else:
            body = float(np.dot(kernel[1:n], zn_hist[n - 1:0:-1])) if n > 1 else 0.0
            conv = dt * (body + 0.5 * kernel[n] * zn_hist[0])
        return -coef * kernel[n] - a_coef * conv

    hist = z  # grows in place; deriv only reads entries < current step
    for n in range(n_steps):
        f_n = deriv(n, hist)
        predictor = z[n] + dt * f_n
        z[n + 1] = predictor
        f_next = deriv(n + 1, hist)
        z[n + 1] = z[n] + 0.5 * dt * (f_n + f_next)
    return dt * np.arange(n_steps + 1), z


# -- Poisson-randomized projections ----------------------------------------


def _event_probability(gamma: float, dt: float) -> float:
    p = 2.0 * gamma * dt
    if not 0.0 < p <= 0.1:
        raise ValueError(f"2 * gamma * dt = {p:.4g} must lie in (0, 0.1]")
    # exact per-step arrival probability; keeps waiting times exponential
    # at grid resolution and the step average equal to the split propagator
    return -math.expm1(-p)


def poisson_pulsed_step(rho: np.ndarray, p, dt: float, rng: np.random.Generator) -> np.ndarray:
    """One step of the Poisson-randomized projection unraveling.

    The state always advances coherently over ``dt`` with the exact
    drive propagator; with probability 1 - exp(-2 gamma dt) (= 2 gamma dt
    to leading order) the step then ends in a nonselective projective
    measurement that zeroes the off-diagonals.  Waiting times between
    events are exponential with mean 1/(2 gamma) at grid resolution, and
    the Bernoulli average of the step is exactly the dephasing
    semigroup composed with the drive.  Requires 2 gamma dt <= 0.1.
    """
    p = _as_lindblad(p).model
    q = _event_probability(p.gamma, dt)
    rho = np.asarray(rho, dtype=complex)
    u = unitary_propagator(p, dt)
    out = u @ rho @ u.conj().T
    if rng.random() < q:
        out[0, 1] = 0.0
        out[1, 0] = 0.0
    return out


def _evolve_poisson(model: ModelParams, dt: float, r0: np.ndarray,
                    uniforms: np.ndarray, record_stride: int = 1):
    """Vectorized Bloch-space implementation of the same step rule."""
    rot = bloch_rotation(model, dt)
    q = _event_probability(model.gamma, dt)
    n_traj, n_steps = uniforms.shape
    n_rec = n_steps // record_stride
    events = np.empty((n_traj, n_steps), dtype=np.uint8)
    bloch = np.empty((n_traj, n_rec, 3))
    x = np.full(n_traj, r0[0])
    y = np.full(n_traj, r0[1])
    z = np.full(n_traj, r0[2])
    r00, r01, r02 = rot[0]
    r10, r11, r12 = rot[1]
    r20, r21, r22 = rot[2]
    for j in range(n_steps):
        hit = uniforms[:, j] < q
        events[:, j] = hit
        # rotate first, then a firing event wipes the coherences
        xr = r00 * x + r01 * y + r02 * z
        yr = r10 * x + r11 * y + r12 * z
        z = r20 * x + r21 * y + r22 * z
        x = np.where(hit, 0.0, xr)
        y = np.where(hit, 0.0, yr)
        if (j + 1) % record_stride == 0:
            k = (j + 1) // record_stride - 1
            bloch[:, k, 0] = x
            bloch[:, k, 1] = y
            bloch[:, k, 2] = z
    return events, bloch


def simulate_poisson_trajectory(model: ModelParams, t_final: float, dt: float,
                                rng_seed: int = 0, initial: QubitState | None = None,
                                record_stride: int = 1) -> TrajectoryRecord:
    """One Poisson-randomized projection run.

    The record's ``readouts`` are the dephasing-event indicators (0/1 per
    step, event counts per block when ``record_stride > 1``).
    """
    _event_probability(model.gamma, dt)
    initial = QubitState.excited() if initial is None else initial
    n_steps = max(1, int(round(t_final / dt)))
    uniforms = make_generator(rng_seed).random(n_steps)[None, :]
    events, bloch = _evolve_poisson(model, dt, initial.bloch(), uniforms, record_stride)
    n_rec = n_steps // record_stride
    times = dt * record_stride * np.arange(1, n_rec + 1)
    counts = events[0, : n_rec * record_stride].reshape(n_rec, record_stride).sum(axis=1)
    return TrajectoryRecord(
        times=times,
        bloch=bloch[0],
        readouts=counts.astype(float),
        seed=rng_seed,
    )


def simulate_poisson_ensemble(model: ModelParams, t_final: float, dt: float,
                              n_traj: int = 1000, master_seed: int = 0,
                              initial: QubitState | None = None, workers: int = 1,
                              record_stride: int = 1) -> EnsembleResult:
    """Monte Carlo average of the Poisson-projection unraveling.

    Converges to the RK4 master-equation solution as n_traj grows and
    dt shrinks; per-trajectory streams and chunked index-ordered
    reduction make the result independent of ``workers``.
    """
    _event_probability(model.gamma, dt)
    initial = QubitState.excited() if initial is None else initial
    r0 = initial.bloch()
    n_steps = max(1, int(round(t_final / dt)))
    n_rec = n_steps // record_stride

    def chunk_sums(start, stop):
        rows = np.empty((stop - start, n_steps))
        for k, index in enumerate(range(start, stop)):
            rows[k] = make_generator(trajectory_seed(master_seed, index)).random(n_steps)
        _, bloch = _evolve_poisson(model, dt, r0, rows, record_stride)
        return bloch.sum(axis=0), (bloch**2).sum(axis=0)

    partials = map_chunks(chunk_sums, n_traj, workers=workers)
    total = sum(p[0] for p in partials)
    total_sq = sum(p[1] for p in partials)
    times = dt * record_stride * np.arange(1, n_rec + 1)
    return combine_moment_sums(times, total, total_sq, n_traj, master_seed)


def poisson_event_intervals(model: ModelParams, t_final: float, dt: float,
                            n_traj: int = 100, master_seed: int = 0) -> np.ndarray:
    """Pooled waiting times between projection events across trajectories.

    Runs the Bernoulli event clock of the Poisson unraveling (no state
    evolution) and returns all inter-event intervals, trajectory by
    trajectory in seed order.  Intervals straddling trajectory
    boundaries are excluded.  The distribution is exponential with mean
    1/(2 gamma) sampled on the step grid, so ``dt`` should be small
    against that mean when comparing to the continuous law.
    """
    q = _event_probability(model.gamma, dt)
    n_steps = max(1, int(round(t_final / dt)))
    pooled = []
    for index in range(n_traj):
        u = make_generator(trajectory_seed(master_seed, index)).random(n_steps)
        steps = np.flatnonzero(u < q)
        if steps.size > 1:
            pooled.append(np.diff(steps) * dt)
    if not pooled:
        return np.empty(0)
    return np.concatenate(pooled)


# -- T1 response scan ------------------------------------------------------


@dataclass(frozen=True)
class T1ResponseScan:
    """Fitted decay rates of the target-population excess across a gamma grid."""

    gammas: np.ndarray
    rates: np.ndarray
    rate_stderr: np.ndarray
    response: np.ndarray


def zeno_response_t1(p, gamma_grid, t_final: float | None = None,
                     dt: float | None = None) -> T1ResponseScan:
    """Fitted decay rate of z - z_steady versus measurement rate.

    For each gamma the full master equation (dephasing + T1) is
    integrated from |1> and the excess of z over its stationary value is
    fitted log-linearly.  With omega_r = 0 the T1 channel alone sets the
    rate, so the response -d(rate)/d(gamma) vanishes identically; with
    gamma_one = 0 the scan reduces to the measurement-only mixing rate.
    """
    p = _as_lindblad(p)
    gammas = np.asarray(gamma_grid, dtype=float).reshape(-1)
    if gammas.size < 3 or not np.all(np.diff(gammas) > 0):
        raise ValueError("gamma_grid must be strictly increasing with >= 3 points")
    rates = np.empty_like(gammas)
    errs = np.empty_like(gammas)
    for i, g in enumerate(gammas):
        run = LindbladParams(p.model.with_gamma(float(g)), p.gamma_one, p.t1_jump_direction)
        guess = p.gamma_one
        if run.model.omega_r > 0:
            if run.model.delta == 0.0:
                guess += analytic_solution_orthogonal(run.model).gamma_mix or run.model.gamma
            else:
                guess += gamma_mix_stabilized(run.model)
        if guess <= 0:
            raise ValueError("no decay scale: gamma_one = 0 and omega_r = 0")
        horizon = t_final if t_final is not None else 6.0 / guess
        step = dt if dt is not None else 0.02 / max(
            run.model.omega, 2.0 * run.model.gamma, p.gamma_one, guess
        )
        times, rhos = integrate_master_equation(run, QubitState.excited(), horizon, step)
        z = bloch_series(rhos)[:, 2]
        excess = z - steady_state_bloch(run)[2]
        scale = abs(excess[0]) if excess[0] != 0 else 1.0
        rate, err, _, _ = envelope_rate(times, excess / scale)
        rates[i] = rate
        errs[i] = err
    return T1ResponseScan(gammas, rates, errs, response_from_rates(gammas, rates))
