"""Shared decay-rate fitting primitives.

Two estimators for the envelope rate of a decaying signal:

* log-linear: least-squares slope of ln|v| over the first contiguous
  stretch where |v| lies inside the fit window (default [0.05, 0.8]),
  which skips both the early transient and the late noise floor;
* peak envelope: the same regression restricted to local maxima of |v|,
  for underdamped signals whose zero crossings would poison ln|v|.

Both return (rate, stderr, (t_start, t_end)) with the rate positive for
decay.  ``response_from_rates`` turns a rate-versus-gamma table into the
negative sensitivity -d(rate)/d(gamma) by second-order divided
differences, exact for linear rate laws.
"""

from __future__ import annotations

import numpy as np

from .errors import InsufficientDataError

WINDOW = (0.05, 0.8)


def _slope_with_stderr(t: np.ndarray, y: np.ndarray,
                       w: np.ndarray | None = None) -> tuple[float, float]:
    n = len(t)
    if w is None:
        w = np.ones(n)
    t_mean = float(np.average(t, weights=w))
    y_mean = float(np.average(y, weights=w))
    sxx = float(np.sum(w * (t - t_mean) ** 2))
    if sxx == 0.0:
        raise InsufficientDataError("degenerate time values in fit window")
    slope = float(np.sum(w * (t - t_mean) * (y - y_mean)) / sxx)
    resid = y - (y_mean + slope * (t - t_mean))
    if n > 2:
        # residual-scaled error: weights set relative precision only, so
        # a uniformly wrong sigma scale does not skew the error bar
        stderr = float(np.sqrt(np.sum(w * resid**2) / (n - 2) / sxx))
    else:
        stderr = float("nan")
    return slope, stderr


def log_linear_fit(times, values, window=WINDOW, sigma=None):
    """Exponential-rate fit of |values| over the contiguous fit window.

    ``sigma``, when given, holds per-sample standard errors of the
    values (as from a Monte Carlo ensemble mean); samples are then
    weighted by their log-domain precision (v/sigma)^2, which keeps the
    noise-dominated tail of the window from steering the slope.  The
    reported error bar treats samples as independent, so for strongly
    correlated noise it is optimistic.
    """
    t = np.asarray(times, dtype=float).reshape(-1)
    v = np.abs(np.asarray(values, dtype=float).reshape(-1))
    lo, hi = window
    inside = np.flatnonzero(v <= hi)
    if inside.size == 0:
        raise InsufficientDataError(f"no samples with |value| <= {hi}")
    start = inside[0]
    below = np.flatnonzero(v[start:] < lo)
    stop = start + below[0] if below.size else len(v)
    idx = np.arange(start, stop)
    idx = idx[v[idx] > 0.0]
    if idx.size < 3:
        raise InsufficientDataError(
            f"only {idx.size} usable samples in the window [{lo}, {hi}]"
        )
    weights = None
    if sigma is not None:
        s = np.asarray(sigma, dtype=float).reshape(-1)
        if s.shape != v.shape:
            raise ValueError("sigma must match the values array")
        if not np.all(s[idx] > 0.0):
            raise ValueError("sigma must be positive over the fit window")
        weights = (v[idx] / s[idx]) ** 2
    slope, stderr = _slope_with_stderr(t[idx], np.log(v[idx]), weights)
    return -slope, stderr, (float(t[idx[0]]), float(t[idx[-1]]))


def _refine_peak(t: np.ndarray, v: np.ndarray, i: int) -> tuple[float, float]:
    # parabola through the sample and its neighbours; the vertex removes
    # the up-to-half-a-step quantization of peak time and height
    x0, x1, x2 = t[i - 1], t[i], t[i + 1]
    y0, y1, y2 = v[i - 1], v[i], v[i + 1]
    d01 = (y1 - y0) / (x1 - x0)
    d12 = (y2 - y1) / (x2 - x1)
    curv = (d12 - d01) / (x2 - x0)
    if curv >= 0.0:
        return float(x1), float(y1)
    xv = 0.5 * (x0 + x1 - d01 / curv)
    if not x0 <= xv <= x2:
        return float(x1), float(y1)
    yv = y0 + d01 * (xv - x0) + curv * (xv - x0) * (xv - x1)
    return float(xv), float(yv)


def peak_envelope_fit(times, values, window=WINDOW):
    """Exponential-rate fit through the local maxima of |values|.

    Each detected maximum is refined to the vertex of a parabola through
    its three samples, so grid spacing barely limits the accuracy.  Peak
    heights may reach below the log-linear window floor (down to lo/5)
    because a peak is a signal feature, not a raw sample; damped ringing
    often shows only two or three maxima before dropping under the
    floor.  Two peaks are enough to determine the rate (they are two
    points on the envelope); the standard error is then reported as 0
    since a two-point fit leaves no residual information.
    """
    t = np.asarray(times, dtype=float).reshape(-1)
    v = np.abs(np.asarray(values, dtype=float).reshape(-1))
    if len(v) < 3:
        raise InsufficientDataError("need at least 3 samples to detect peaks")
    # interior maxima: strict rise into the peak, non-strict fall out of it
    peaks = np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])) + 1
    lo, hi = window
    floor = lo / 5.0
    refined = [_refine_peak(t, v, i) for i in peaks]
    refined = [(tp, hp) for tp, hp in refined if floor <= hp <= hi]
    if len(refined) < 2:
        raise InsufficientDataError(
            f"only {len(refined)} usable peaks with heights in [{floor}, {hi}]"
        )
    tp = np.array([p[0] for p in refined])
    hp = np.array([p[1] for p in refined])
    slope, stderr = _slope_with_stderr(tp, np.log(hp))
    if len(refined) == 2:
        stderr = 0.0
    return -slope, stderr, (float(tp[0]), float(tp[-1]))


def envelope_rate(times, values, window=WINDOW, sigma=None):
    """Dispatching envelope fit: peaks when the signal rings, else ln|v|.

    Returns (rate, stderr, (t_start, t_end), method) where method is
    ``"peak_envelope_fit"`` or ``"log_linear_fit"``.  A signal counts as
    ringing when it changes sign while still above the lower window
    edge; that criterion is immune to noise bumps on a monotone decay,
    which would otherwise masquerade as peaks, and to small decaying
    wiggles riding on a one-signed envelope, which peak fitting would
    overweight.  ``sigma`` weights the log-linear branch only.
    """
    v = np.asarray(values, dtype=float).reshape(-1)
    big = v[np.abs(v) >= window[0]]
    rings = big.size > 1 and bool(np.any(np.sign(big[1:]) != np.sign(big[:-1])))
    if rings:
        # oscillating signal: only the envelope through the peaks is a
        # valid exponential; a log-linear fit through a lobe would track
        # the oscillation slope, so insufficient peaks is a hard error
        rate, stderr, span = peak_envelope_fit(times, values, window)
        return rate, stderr, span, "peak_envelope_fit"
    rate, stderr, span = log_linear_fit(times, values, window, sigma)
    return rate, stderr, span, "log_linear_fit"


def response_from_rates(gammas, rates) -> np.ndarray:
    """Negative derivative -d(rate)/d(gamma) by divided differences.

    Central second-order differences at interior points (exact for rate
    laws linear in gamma), one-sided at the ends.  Requires at least
    3 strictly increasing grid points.
    """
    g = np.asarray(gammas, dtype=float).reshape(-1)
    r = np.asarray(rates, dtype=float).reshape(-1)
    if g.size != r.size or g.size < 3:
        raise ValueError("need matching gamma/rate arrays with at least 3 points")
    if not np.all(np.diff(g) > 0):
        raise ValueError("gamma grid must be strictly increasing")
    d = np.empty_like(r)
    d[1:-1] = (r[2:] - r[:-2]) / (g[2:] - g[:-2])
    d[0] = (r[1] - r[0]) / (g[1] - g[0])
    d[-1] = (r[-1] - r[-2]) / (g[-1] - g[-2])
    return -d
