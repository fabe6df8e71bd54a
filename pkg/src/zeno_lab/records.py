"""Result containers shared by the trajectory and ensemble simulators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


def _as_readonly(a, dtype=float) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(a, dtype=dtype))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TrajectoryRecord:
    """One selective measurement trajectory.

    ``times[i]`` is the instant just after the i-th measurement step;
    ``bloch[i]`` the post-measurement Bloch vector; ``readouts[i]`` the
    measurement outcome of that step (0/1 for projective pulses and for
    dephasing-event indicators, a real voltage for the continuous probe).
    The initial state at t = 0 is not part of the record.  ``fine_times``
    and ``fine_bloch``, when present, sub-sample the coherent arcs between
    measurements for plotting and start at t = 0.
    """

    times: np.ndarray
    bloch: np.ndarray
    readouts: np.ndarray
    seed: int
    fine_times: np.ndarray | None = None
    fine_bloch: np.ndarray | None = None

    def __post_init__(self):
        times = _as_readonly(self.times)
        bloch = _as_readonly(self.bloch)
        readouts = _as_readonly(self.readouts)
        if not (len(times) == len(bloch) == len(readouts)):
            raise ValueError(
                f"length mismatch: times {len(times)}, bloch {len(bloch)}, readouts {len(readouts)}"
            )
        if bloch.ndim != 2 or (len(bloch) and bloch.shape[1] != 3):
            raise ValueError(f"bloch must have shape (n, 3), got {bloch.shape}")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "bloch", bloch)
        object.__setattr__(self, "readouts", readouts)
        if self.fine_times is not None:
            object.__setattr__(self, "fine_times", _as_readonly(self.fine_times))
            object.__setattr__(self, "fine_bloch", _as_readonly(self.fine_bloch))

    @property
    def z(self) -> np.ndarray:
        return self.bloch[:, 2]

    @property
    def p1(self) -> np.ndarray:
        """Survival population (1 + z) / 2 along the trajectory."""
        return 0.5 * (1.0 + self.bloch[:, 2])


@dataclass(frozen=True)
class EnsembleResult:
    """Nonselective estimate from averaging ``n_traj`` trajectories.

    ``stderr`` columns are sample standard deviations (ddof = 1) of the
    per-trajectory Bloch components divided by sqrt(n_traj).
    """

    times: np.ndarray
    mean_bloch: np.ndarray
    stderr_bloch: np.ndarray
    n_traj: int
    master_seed: int
    config: dict[str, Any] | None = field(default=None)

    def __post_init__(self):
        times = _as_readonly(self.times)
        mean = _as_readonly(self.mean_bloch)
        err = _as_readonly(self.stderr_bloch)
        if mean.shape != (len(times), 3) or err.shape != mean.shape:
            raise ValueError(
                f"shape mismatch: times {times.shape}, mean {mean.shape}, stderr {err.shape}"
            )
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if self.n_traj < 1:
            raise ValueError(f"n_traj must be >= 1, got {self.n_traj}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "mean_bloch", mean)
        object.__setattr__(self, "stderr_bloch", err)

    @property
    def z(self) -> np.ndarray:
        return self.mean_bloch[:, 2]

    @property
    def z_err(self) -> np.ndarray:
        return self.stderr_bloch[:, 2]

    @property
    def p1(self) -> np.ndarray:
        return 0.5 * (1.0 + self.mean_bloch[:, 2])

    @property
    def p1_err(self) -> np.ndarray:
        return 0.5 * self.stderr_bloch[:, 2]


def combine_moment_sums(times, total, total_sq, count, master_seed, config=None) -> EnsembleResult:
    """Build an :class:`EnsembleResult` from accumulated first/second moments."""
    count = int(count)
    mean = total / count
    if count > 1:
        # sample variance via sum of squares; clip tiny negative roundoff
        var = np.maximum(total_sq - count * mean**2, 0.0) / (count - 1)
        stderr = np.sqrt(var / count)
    else:
        stderr = np.zeros_like(mean)
    return EnsembleResult(
        times=times,
        mean_bloch=mean,
        stderr_bloch=stderr,
        n_traj=count,
        master_seed=master_seed,
        config=config,
    )
