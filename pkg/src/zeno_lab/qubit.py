"""Driven two-level system: parameters, states, and coherent propagation.

Basis ordering is ``(|1>, |0>)``: index 0 of an amplitude pair is the
measured +1 eigenstate of sigma_z.  The drive Hamiltonian (hbar = 1) is

    H = (omega_r / 2) sigma_x + (delta / 2) sigma_z
      = (omega / 2) sigma_theta,

with generalized frequency ``omega = sqrt(omega_r**2 + delta**2)`` and
tilt angle ``theta = atan2(omega_r, delta)``, so ``sigma_theta =
sigma_z cos(theta) + sigma_x sin(theta)``.  All rates are quoted in the
same (arbitrary) inverse-time unit as ``omega_r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

_NORM_TOL = 1e-10


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Static model parameters: Rabi rate, detuning, measurement rate.

    Parameters
    ----------
    omega_r : float
        Rabi frequency of the coherent drive (>= 0).  Conventionally 1;
        all other rates are then expressed in units of ``omega_r``.
    delta : float
        Detuning of the measured axis from the drive axis.  ``delta = 0``
        is the orthogonal arrangement, ``delta != 0`` tilts the effective
        rotation axis and stabilizes the measured populations.
    gamma : float
        Measurement rate (>= 0): pulse rate ``1/dt`` for projective
        sequences, or the strength of the continuous Gaussian readout.
    """

    omega_r: float
    delta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega_r", _require_finite("omega_r", self.omega_r))
        object.__setattr__(self, "delta", _require_finite("delta", self.delta))
        object.__setattr__(self, "gamma", _require_finite("gamma", self.gamma))
        if self.omega_r < 0:
            raise ValueError(f"omega_r must be >= 0, got {self.omega_r}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def omega(self) -> float:
        """Generalized rotation frequency sqrt(omega_r**2 + delta**2)."""
        return math.hypot(self.omega_r, self.delta)

    @property
    def theta(self) -> float:
        """Tilt of the rotation axis from the measured z axis, in [0, pi]."""
        return math.atan2(self.omega_r, self.delta)

    def with_gamma(self, gamma: float) -> "ModelParams":
        """Copy of these parameters with a different measurement rate."""
        return ModelParams(self.omega_r, self.delta, gamma)


@dataclass(frozen=True)
class QubitState:
    """Immutable qubit state, pure (amplitude pair) or mixed (2x2 density matrix).

    Construct through :meth:`pure`, :meth:`mixed`, :meth:`excited`,
    :meth:`ground` or :meth:`from_bloch`.  Pure amplitudes are renormalized
    on construction; a norm off by more than 1e-10 is rejected as a bug in
    the caller rather than silently fixed.
    """

    amplitudes: np.ndarray | None = None
    rho: np.ndarray | None = None
    _validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        if (self.amplitudes is None) == (self.rho is None):
            raise ValueError("exactly one of amplitudes or rho must be given")
        if self.amplitudes is not None:
            psi = np.asarray(self.amplitudes, dtype=complex).reshape(2)
            norm = float(np.sqrt(np.sum(np.abs(psi) ** 2)))
            if self._validate and abs(norm - 1.0) > _NORM_TOL:
                raise ValueError(f"state norm {norm} deviates from 1 by more than {_NORM_TOL}")
            if norm == 0.0:
                raise ValueError("zero state vector")
            psi = psi / norm
            psi.setflags(write=False)
            object.__setattr__(self, "amplitudes", psi)
        else:
            rho = np.asarray(self.rho, dtype=complex).reshape(2, 2)
            if self._validate:
                if abs(np.trace(rho).real - 1.0) > _NORM_TOL or abs(np.trace(rho).imag) > _NORM_TOL:
                    raise ValueError(f"density matrix trace {np.trace(rho)} deviates from 1")
                if np.max(np.abs(rho - rho.conj().T)) > _NORM_TOL:
                    raise ValueError("density matrix is not Hermitian within 1e-10")
                # positivity for a 2x2 unit-trace Hermitian matrix: Bloch length <= 1
                x = 2.0 * rho[0, 1].real
                y = -2.0 * rho[0, 1].imag
                z = (rho[0, 0] - rho[1, 1]).real
                if x * x + y * y + z * z > 1.0 + 1e-8:
                    raise ValueError("density matrix has a negative eigenvalue beyond 1e-8")
            rho = 0.5 * (rho + rho.conj().T)
            rho = rho / np.trace(rho).real
            rho.setflags(write=False)
            object.__setattr__(self, "rho", rho)

    # -- constructors -------------------------------------------------

    @classmethod
    def pure(cls, amplitudes) -> "QubitState":
        return cls(amplitudes=np.asarray(amplitudes, dtype=complex))

    @classmethod
    def mixed(cls, rho) -> "QubitState":
        return cls(rho=np.asarray(rho, dtype=complex))

    @classmethod
    def excited(cls) -> "QubitState":
        """The measured +1 eigenstate |1>."""
        return cls(amplitudes=np.array([1.0, 0.0], dtype=complex))

    @classmethod
    def ground(cls) -> "QubitState":
        """The measured -1 eigenstate |0>."""
        return cls(amplitudes=np.array([0.0, 1.0], dtype=complex))

    @classmethod
    def from_bloch(cls, x: float, y: float, z: float) -> "QubitState":
        rho = 0.5 * (IDENTITY + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)
        return cls(rho=rho)

    # -- views --------------------------------------------------------

    @property
    def is_pure(self) -> bool:
        return self.amplitudes is not None

    def density_matrix(self) -> np.ndarray:
        if self.amplitudes is not None:
            return np.outer(self.amplitudes, self.amplitudes.conj())
        return np.array(self.rho)

    def bloch(self) -> np.ndarray:
        """Bloch vector (x, y, z) with z = <sigma_z> = P_1 - P_0."""
        if self.amplitudes is not None:
            a, b = self.amplitudes
            cross = np.conj(a) * b
            return np.array([2.0 * cross.real, 2.0 * cross.imag, abs(a) ** 2 - abs(b) ** 2])
        r = self.rho
        return np.array([
            2.0 * r[0, 1].real,
            -2.0 * r[0, 1].imag,
            (r[0, 0] - r[1, 1]).real,
        ])

    @property
    def p1(self) -> float:
        """Population of the measured +1 eigenstate, (1 + z) / 2."""
        if self.amplitudes is not None:
            return float(abs(self.amplitudes[0]) ** 2)
        return float(self.rho[0, 0].real)


def unitary_propagator(params: ModelParams, t: float) -> np.ndarray:
    """Closed-form drive propagator U(t) = exp(-i omega t sigma_theta / 2).

    Parameters
    ----------
    params : ModelParams
    t : float
        Evolution time; may be negative (inverse propagation).

    Returns
    -------
    ndarray
        2x2 complex unitary, computed as
        cos(omega t / 2) I - i sin(omega t / 2) sigma_theta.
    """
    t = _require_finite("t", t)
    half = 0.5 * params.omega * t
    c, s = math.cos(half), math.sin(half)
    ct, st = math.cos(params.theta), math.sin(params.theta)
    return np.array(
        [
            [c - 1j * s * ct, -1j * s * st],
            [-1j * s * st, c + 1j * s * ct],
        ]
    )


def apply_unitary(state: QubitState, u: np.ndarray) -> QubitState:
    """Propagate a state through a unitary, renormalizing the result.

    Raises ``ValueError`` if ``u`` is not unitary within 1e-10; that is a
    contract violation by the caller, not a recoverable condition.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    defect = np.max(np.abs(u.conj().T @ u - IDENTITY))
    if defect > 1e-10:
        raise ValueError(f"matrix is not unitary: max |u^dag u - I| = {defect:.3e}")
    if state.is_pure:
        return QubitState(amplitudes=u @ state.amplitudes, _validate=False)
    return QubitState(rho=u @ state.rho @ u.conj().T, _validate=False)


def rotate_frame(bloch, theta: float) -> np.ndarray:
    """Rotate a Bloch vector from the bare frame into the tilted frame.

    (x, y, z) -> (x cos(theta) - z sin(theta), y, z cos(theta) + x sin(theta)).
    Total on finite inputs; passing ``-theta`` inverts the map exactly.
    """
    x, y, z = (float(v) for v in np.asarray(bloch, dtype=float).reshape(3))
    c, s = math.cos(theta), math.sin(theta)
    return np.array([x * c - z * s, y, z * c + x * s])


def bloch_rotation(params: ModelParams, t: float) -> np.ndarray:
    """SO(3) rotation of the Bloch ball equivalent to :func:`unitary_propagator`.

    Rotation by angle ``omega * t`` about the unit axis
    (sin(theta), 0, cos(theta)), via the Rodrigues formula.  Useful for
    propagating mixed-state Bloch vectors without complex arithmetic.
    """
    t = _require_finite("t", t)
    phi = params.omega * t
    c, s = math.cos(phi), math.sin(phi)
    nx, nz = math.sin(params.theta), math.cos(params.theta)
    axis = np.array([nx, 0.0, nz])
    k = np.array([[0.0, -nz, 0.0], [nz, 0.0, -nx], [0.0, nx, 0.0]])
    return c * np.eye(3) + (1.0 - c) * np.outer(axis, axis) + s * k
