"""Exception types shared across the package.

Plain ``ValueError`` is used for malformed arguments (bad shapes, values
outside documented domains).  The classes below mark conditions that a
caller may want to handle specifically: leaving the validity window of a
closed-form rate, numerical trouble during integration, or records too
short to fit.
"""


class ZenoLabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ZenoLabError):
    """Invalid or inconsistent run configuration (bad key, bad value, bad grid)."""


class RegimeError(ZenoLabError):
    """A closed-form expression was evaluated outside its validity window."""


class ZeroProbabilityError(ZenoLabError):
    """Conditioning on a measurement outcome whose probability is numerically zero."""


class ReadoutUnderflowError(ZenoLabError):
    """A readout likelihood underflowed; the Bayesian update is undefined."""


class PositivityError(ZenoLabError):
    """The integrator produced a state outside the Bloch ball.

    Carries the step size that failed and a suggested replacement.
    """

    def __init__(self, message: str, dt: float | None = None, suggested_dt: float | None = None):
        super().__init__(message)
        self.dt = dt
        self.suggested_dt = suggested_dt


class InsufficientDataError(ZenoLabError):
    """Not enough usable samples (or peaks, or transitions) to estimate a rate."""


class DataIntegrityError(ZenoLabError):
    """Refusing to write non-finite values to an output file."""
