"""Quantum Zeno and anti-Zeno dynamics of a driven, measured qubit.

Selective measurement trajectories (projective pulses and continuous
weak monitoring), nonselective ensemble dynamics (Lindblad integrator,
memory-kernel form, Poisson-randomized pulses), and the rate analysis
connecting them: mixing rates, jump rates, the Zeno response, and the
critical measurement rate.
"""

from .analysis import (
    CriticalRateResult,
    RateEstimate,
    ZenoResponseCurve,
    continuous_orthogonal_rate_source,
    critical_rate,
    estimate_jump_rate,
    fit_decay_envelope,
    heatmap_grid,
    lindblad_fit_rate_source,
    locate_critical_rate,
    pulsed_rate_source,
    spectral_overlap,
    stabilized_rate_source,
    survival_probability,
    zeno_response_scan,
)
from .config import GridSpec, RunConfig, load_config_file, parse_config, parse_grid_spec
from .continuous import (
    ContinuousConfig,
    bayesian_update,
    exponential_filter,
    gaussian_kraus,
    readout_density,
    sample_readout,
    simulate_continuous_ensemble,
    simulate_continuous_trajectory,
    sse_step_euler,
    wiener_increments,
)
from .ensemble import (
    AnalyticSolution,
    LindbladParams,
    T1Direction,
    analytic_solution_orthogonal,
    analytic_z_orthogonal,
    bloch_series,
    gamma0_stabilized,
    gamma_mix_stabilized,
    integrate_master_equation,
    lindblad_rhs,
    liouvillian_matrix,
    memory_kernel_z,
    poisson_event_intervals,
    simulate_poisson_ensemble,
    simulate_poisson_trajectory,
    steady_state_bloch,
    xi_rates,
    zeno_response_t1,
)
from .errors import (
    ConfigError,
    DataIntegrityError,
    InsufficientDataError,
    PositivityError,
    ReadoutUnderflowError,
    RegimeError,
    ZenoLabError,
    ZeroProbabilityError,
)
from .fitting import log_linear_fit, peak_envelope_fit, response_from_rates
from .pulsed import (
    PulsedConfig,
    analytic_z_pulsed,
    gamma_mix_pulsed,
    jump_probability,
    project,
    record_probability,
    simulate_pulsed_ensemble,
    simulate_pulsed_trajectory,
)
from .qubit import (
    ModelParams,
    QubitState,
    apply_unitary,
    bloch_rotation,
    rotate_frame,
    unitary_propagator,
)
from .records import EnsembleResult, TrajectoryRecord
from .seeding import make_generator, trajectory_seed

__version__ = "0.1.0"

__all__ = [
    "AnalyticSolution",
    "ConfigError",
    "ContinuousConfig",
    "CriticalRateResult",
    "DataIntegrityError",
    "EnsembleResult",
    "GridSpec",
    "InsufficientDataError",
    "LindbladParams",
    "ModelParams",
    "PositivityError",
    "PulsedConfig",
    "QubitState",
    "RateEstimate",
    "ReadoutUnderflowError",
    "RegimeError",
    "RunConfig",
    "T1Direction",
    "TrajectoryRecord",
    "ZenoLabError",
    "ZenoResponseCurve",
    "ZeroProbabilityError",
    "analytic_solution_orthogonal",
    "analytic_z_orthogonal",
    "analytic_z_pulsed",
    "apply_unitary",
    "bayesian_update",
    "bloch_rotation",
    "bloch_series",
    "continuous_orthogonal_rate_source",
    "critical_rate",
    "estimate_jump_rate",
    "exponential_filter",
    "fit_decay_envelope",
    "gamma0_stabilized",
    "gamma_mix_pulsed",
    "gamma_mix_stabilized",
    "gaussian_kraus",
    "heatmap_grid",
    "integrate_master_equation",
    "jump_probability",
    "lindblad_fit_rate_source",
    "lindblad_rhs",
    "liouvillian_matrix",
    "load_config_file",
    "locate_critical_rate",
    "log_linear_fit",
    "make_generator",
    "memory_kernel_z",
    "parse_config",
    "parse_grid_spec",
    "peak_envelope_fit",
    "poisson_event_intervals",
    "project",
    "pulsed_rate_source",
    "readout_density",
    "record_probability",
    "response_from_rates",
    "rotate_frame",
    "sample_readout",
    "simulate_continuous_ensemble",
    "simulate_continuous_trajectory",
    "simulate_poisson_ensemble",
    "simulate_poisson_trajectory",
    "simulate_pulsed_ensemble",
    "simulate_pulsed_trajectory",
    "spectral_overlap",
    "sse_step_euler",
    "stabilized_rate_source",
    "steady_state_bloch",
    "survival_probability",
    "trajectory_seed",
    "unitary_propagator",
    "wiener_increments",
    "xi_rates",
    "zeno_response_scan",
    "zeno_response_t1",
    "__version__",
]
