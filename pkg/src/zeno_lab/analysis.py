"""Rate extraction and regime classification.

Turns simulated or closed-form dynamics into the quantities the model
is organized around: survival probability of the initially measured
eigenstate, the mixing rate of its decay envelope, the telegraph jump
rate of selective trajectories, and the Zeno response

    R_Z = -d(Gamma_mix)/d(gamma),

whose sign classifies a measurement rate as anti-Zeno (mixing enhanced
by faster measurement), Zeno (suppressed), or critical.  Rate sources
for response scans come in analytic and fitted flavors so the scan
machinery is independent of where the rates come from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import (
    LindbladParams,
    analytic_solution_orthogonal,
    analytic_z_orthogonal,
    bloch_series,
    gamma0_stabilized,
    gamma_mix_stabilized,
    integrate_master_equation,
    steady_state_bloch,
)
from .errors import InsufficientDataError, RegimeError
from .fitting import WINDOW, envelope_rate, log_linear_fit, peak_envelope_fit, response_from_rates
from .pulsed import gamma_mix_pulsed
from .qubit import ModelParams, QubitState
from .records import EnsembleResult, TrajectoryRecord

ANTI_ZENO = "anti_zeno"
CRITICAL = "critical"
ZENO = "zeno"

EPSILON_LABEL = 1e-3
_NOISE_FLOOR = 1e-3


@dataclass(frozen=True)
class RateEstimate:
    """A decay or jump rate with its uncertainty and provenance."""

    value: float
    stderr: float
    method: str
    fit_window: tuple[float, float]
    one_sided: bool = False

    _METHODS = ("log_linear_fit", "peak_envelope_fit", "dwell_time", "analytic")

    def __post_init__(self):
        if self.method not in self._METHODS:
            raise ValueError(f"method must be one of {self._METHODS}, got {self.method!r}")
        if not self.value >= 0.0:
            raise ValueError(f"rate must be >= 0, got {self.value}")
        if not self.stderr >= 0.0:
            raise ValueError(f"stderr must be >= 0, got {self.stderr}")


@dataclass(frozen=True)
class ZenoResponseCurve:
    """Mixing rate, response, and regime label across a measurement-rate grid."""

    gamma_grid: np.ndarray
    gamma_mix_values: np.ndarray
    response_values: np.ndarray
    regime_labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma_grid", np.asarray(self.gamma_grid, dtype=float))
        object.__setattr__(self, "gamma_mix_values", np.asarray(self.gamma_mix_values, dtype=float))
        object.__setattr__(self, "response_values", np.asarray(self.response_values, dtype=float))
        n = self.gamma_grid.size
        if not (self.gamma_mix_values.size == n and self.response_values.size == n
                and len(self.regime_labels) == n):
            raise ValueError("curve arrays must have equal length")


@dataclass(frozen=True)
class CriticalRateResult:
    """Located response zero crossing with its bracketing grid cell."""

    rate: float
    bracket: tuple[float, float]


def critical_rate(model: ModelParams) -> float:
    """Measurement rate of the anti-Zeno/Zeno transition for this model.

    omega_r for the orthogonal arrangement (delta = 0), omega/2 for the
    stabilized one.
    """
    if model.delta == 0.0:
        return model.omega_r
    return 0.5 * model.omega


def survival_probability(data) -> np.ndarray:
    """Population P_1 = (1 + z)/2 of the measured +1 eigenstate.

    Accepts a density-matrix series (..., 2, 2), a Bloch series
    (..., 3), bare z values, a (times, rhos) pair as returned by the
    integrator, a :class:`TrajectoryRecord`, or an
    :class:`EnsembleResult`; returns the matching array of P_1 values.
    """
    if isinstance(data, EnsembleResult):
        return data.p1
    if isinstance(data, TrajectoryRecord):
        return 0.5 * (1.0 + data.z)
    if isinstance(data, tuple) and len(data) == 2:
        return survival_probability(data[1])
    arr = np.asarray(data)
    if arr.ndim >= 2 and arr.shape[-2:] == (2, 2):
        z = bloch_series(arr.astype(complex))[..., 2]
    elif arr.ndim >= 1 and arr.shape[-1] == 3 and not np.iscomplexobj(arr):
        z = arr[..., 2].astype(float)
    else:
        z = arr.astype(float)
    return 0.5 * (1.0 + z)


def fit_decay_envelope(times, values, method: str = "auto",
                       window=WINDOW, sigma=None) -> RateEstimate:
    """Envelope rate of a decaying signal as a :class:`RateEstimate`.

    ``method`` selects ``"log_linear_fit"`` (slope of ln|v| over the
    window), ``"peak_envelope_fit"`` (slope through local maxima of
    |v|), or ``"auto"``, which uses peaks only when the signal actually
    changes sign above the window floor.  ``sigma`` holds per-sample
    standard errors (ensemble means carry them) and precision-weights
    the log-linear fit.  Requires at least 10 samples with some signal
    above the 1e-3 noise floor.
    """
    t = np.asarray(times, dtype=float).reshape(-1)
    v = np.asarray(values, dtype=float).reshape(-1)
    if t.size != v.size:
        raise ValueError("times and values must have equal length")
    if t.size < 10:
        raise InsufficientDataError(f"need at least 10 samples, got {t.size}")
    if np.all(np.abs(v) < _NOISE_FLOOR):
        raise InsufficientDataError(f"all values below the {_NOISE_FLOOR} noise floor")
    if method == "auto":
        rate, stderr, span, used = envelope_rate(t, v, window, sigma)
    elif method == "log_linear_fit":
        rate, stderr, span = log_linear_fit(t, v, window, sigma)
        used = method
    elif method == "peak_envelope_fit":
        rate, stderr, span = peak_envelope_fit(t, v, window)
        used = method
    else:
        raise ValueError(f"unknown fit method {method!r}")
    return RateEstimate(value=rate, stderr=stderr, method=used, fit_window=span)


def estimate_jump_rate(records, threshold_hi: float = 0.8,
                       threshold_lo: float = -0.8) -> RateEstimate:
    """Telegraph jump rate from trajectory z series by hysteresis dwell times.

    A sample at z >= threshold_hi is assigned the +1 level, z <=
    threshold_lo the -1 level, and anything between keeps the previous
    level, so diffusive wandering inside the dead band is not counted
    as switching.  The combined rate is total transitions over total
    assigned dwell time, with Poisson standard error rate/sqrt(n).
    When only one level is ever occupied the estimate is flagged
    ``one_sided`` (and a trajectory pinned with no transitions reports
    rate 0 with 1/T_total as the error scale).
    """
    if not -1.0 < threshold_lo < threshold_hi < 1.0:
        raise ValueError("need -1 < threshold_lo < threshold_hi < 1")
    if isinstance(records, TrajectoryRecord):
        records = [records]
    records = list(records)
    if not records:
        raise ValueError("no trajectories given")

    transitions = 0
    dwell = {1: 0.0, -1: 0.0}
    t_lo = math.inf
    t_hi = -math.inf
    for rec in records:
        z = np.asarray(rec.z, dtype=float)
        times = np.asarray(rec.times, dtype=float)
        durations = np.diff(times, prepend=2.0 * times[0] - times[1] if len(times) > 1
                            else times[0] - 1.0)
        level = 0
        for zi, dur in zip(z, durations):
            if zi >= threshold_hi:
                new = 1
            elif zi <= threshold_lo:
                new = -1
            else:
                new = level
            if new != 0:
                dwell[new] += dur
                if level != 0 and new != level:
                    transitions += 1
            level = new
        t_lo = min(t_lo, float(times[0]))
        t_hi = max(t_hi, float(times[-1]))

    total_time = dwell[1] + dwell[-1]
    if total_time <= 0.0:
        raise InsufficientDataError("no samples beyond either threshold")
    one_sided = dwell[1] == 0.0 or dwell[-1] == 0.0
    if transitions == 0:
        return RateEstimate(0.0, 1.0 / total_time, "dwell_time", (t_lo, t_hi),
                            one_sided=True)
    rate = transitions / total_time
    return RateEstimate(rate, rate / math.sqrt(transitions), "dwell_time",
                        (t_lo, t_hi), one_sided=one_sided)


def zeno_response_scan(gamma_grid, rate_source) -> ZenoResponseCurve:
    """Mixing rate and Zeno response across a (log-spaced) gamma grid.

    ``rate_source`` maps a measurement rate to Gamma_mix.  The response
    is formed by central divided differences on the grid (one-sided at
    the ends), which the log spacing keeps well conditioned; labels use
    a +-1e-3 dead band around zero.
    """
    gammas = np.asarray(gamma_grid, dtype=float).reshape(-1)
    if gammas.size < 3:
        raise ValueError("gamma grid needs at least 3 points")
    if not np.all(np.diff(gammas) > 0):
        raise ValueError("gamma grid must be strictly increasing")
    rates = np.array([float(rate_source(g)) for g in gammas])
    response = response_from_rates(gammas, rates)
    labels = tuple(
        ANTI_ZENO if r < -EPSILON_LABEL else ZENO if r > EPSILON_LABEL else CRITICAL
        for r in response
    )
    return ZenoResponseCurve(gammas, rates, response, labels)


def locate_critical_rate(curve: ZenoResponseCurve) -> CriticalRateResult | None:
    """Zero crossing of the response, or None when there is none.

    Points inside the labeling dead band are skipped; the first pair of
    significant opposite-sign responses brackets the crossing, and the
    rate is the root of the response interpolated linearly in ln(gamma).
    """
    g = curve.gamma_grid
    r = curve.response_values
    strong = np.flatnonzero(np.abs(r) > EPSILON_LABEL)
    for a, b in zip(strong[:-1], strong[1:]):
        if np.sign(r[a]) != np.sign(r[b]):
            la, lb = math.log(g[a]), math.log(g[b])
            root = la + (0.0 - r[a]) * (lb - la) / (r[b] - r[a])
            return CriticalRateResult(math.exp(root), (float(g[a]), float(g[b])))
    return None


def spectral_overlap(model: ModelParams) -> float:
    """Overlap rate pi * omega_r^2 * L(0).

    L is the unit-area Lorentzian of half-width 2 gamma centered at the
    precession frequency omega, evaluated at zero frequency where the
    measured populations sit; the result coincides exactly with the
    golden-rule mixing rate.
    """
    if not model.gamma > 0:
        raise ValueError("spectral overlap requires gamma > 0")
    width = 2.0 * model.gamma
    lorentz_at_zero = (width / math.pi) / (model.omega**2 + width**2)
    return math.pi * model.omega_r**2 * lorentz_at_zero


# -- rate sources for response scans ---------------------------------------


def pulsed_rate_source(model: ModelParams):
    """Analytic pulsed mixing rate as a function of the pulse rate."""

    def source(gamma: float) -> float:
        return gamma_mix_pulsed(model.with_gamma(float(gamma)))

    return source


def continuous_orthogonal_rate_source(model: ModelParams):
    """Closed-form damped-oscillator mixing rate (delta = 0 only)."""
    if model.delta != 0.0:
        raise RegimeError("orthogonal closed forms require delta = 0")

    def source(gamma: float) -> float:
        return analytic_solution_orthogonal(model.with_gamma(float(gamma))).gamma_mix

    return source


def stabilized_rate_source(model: ModelParams):
    """Self-consistent stabilized mixing rate as a function of gamma."""

    def source(gamma: float) -> float:
        return gamma_mix_stabilized(model.with_gamma(float(gamma)))

    return source


def lindblad_fit_rate_source(model: ModelParams, t_final: float | None = None,
                             dt: float | None = None, window=WINDOW):
    """Mixing rate fitted from master-equation runs at each gamma.

    Each call integrates from the measured eigenstate and fits the
    decay envelope of z; the horizon defaults to six predicted decay
    times and the step to 0.04 of the fastest timescale.
    """

    def source(gamma: float) -> float:
        run = model.with_gamma(float(gamma))
        if run.delta == 0.0:
            sol = analytic_solution_orthogonal(run)
            guess = sol.gamma_mix if sol.gamma_mix > 0 else run.omega_r
        else:
            guess = gamma_mix_stabilized(run)
        if guess <= 0:
            raise RegimeError("no finite decay predicted; cannot size the fit horizon")
        horizon = t_final if t_final is not None else 6.0 / guess
        step = dt if dt is not None else 0.04 / max(run.omega, 2.0 * run.gamma)
        times, rhos = integrate_master_equation(
            LindbladParams(run), QubitState.excited(), horizon, step
        )
        z = bloch_series(rhos)[:, 2]
        rate, _, _, _ = envelope_rate(times, z, window)
        return rate

    return source


# -- P_1 heatmaps over gamma x time ----------------------------------------


def heatmap_grid(gamma_values, times, dynamics_source) -> np.ndarray:
    """Matrix of P_1, one row per gamma, one column per time.

    ``dynamics_source(gamma, times)`` must return the z series on the
    given time grid.  Values are clipped to [0, 1] against roundoff.
    """
    gammas = np.asarray(gamma_values, dtype=float).reshape(-1)
    t = np.asarray(times, dtype=float).reshape(-1)
    if gammas.size == 0 or t.size == 0:
        raise ValueError("empty gamma or time grid")
    out = np.empty((gammas.size, t.size))
    for i, g in enumerate(gammas):
        z = np.asarray(dynamics_source(float(g), t), dtype=float).reshape(-1)
        if z.size != t.size:
            raise ValueError("dynamics source returned a misshapen z series")
        out[i] = 0.5 * (1.0 + z)
    return np.clip(out, 0.0, 1.0)


def analytic_heatmap_source(model: ModelParams):
    """Closed-form z(t) rows for the orthogonal arrangement."""
    if model.delta != 0.0:
        raise RegimeError("analytic heatmap rows require delta = 0")

    def source(gamma: float, times) -> np.ndarray:
        return analytic_z_orthogonal(model.with_gamma(gamma), times)

    return source


def lindblad_heatmap_source(model: ModelParams, dt: float | None = None):
    """Master-equation z(t) rows, interpolated onto the requested times."""

    def source(gamma: float, times) -> np.ndarray:
        run = model.with_gamma(gamma)
        t = np.asarray(times, dtype=float).reshape(-1)
        t_max = float(t.max())
        if t_max <= 0:
            return np.ones_like(t)
        step = dt if dt is not None else min(0.04 / max(run.omega, 2.0 * run.gamma),
                                             t_max / 16.0)
        grid, rhos = integrate_master_equation(
            LindbladParams(run), QubitState.excited(), t_max, step
        )
        return np.interp(t, grid, bloch_series(rhos)[:, 2])

    return source
