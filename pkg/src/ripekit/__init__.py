"""Progressive InSAR phase estimation.

A recursive phase-linking estimator built around a forgetting-factor running
reference and a calibrated stable reference, plus the machinery to evaluate
it: a complex-Gaussian stack simulator driven by parametric temporal
coherence models, an EMI full-covariance baseline, direct interferograms, and
a Monte Carlo bias/variance harness. A FastAPI service exposes all of it; the
CLI is a thin client of that service.
"""

__version__ = "0.1.0"

from .baselines import (
    EmiConfig,
    direct_interferogram_phase,
    direct_phase_series,
    emi_phases,
)
from .coherence import (
    PRESETS,
    SICILY_C_BAND,
    AcquisitionTimeline,
    CoherenceComponent,
    TemporalCoherenceModel,
    covariance_matrix,
    get_preset,
    phase_flat,
)
from .errors import (
    ConfigError,
    DegenerateWindowError,
    EigendecompositionError,
    InvalidModelError,
    MonteCarloError,
    RipekitError,
    SingularCoherenceError,
    SingularCovarianceError,
    StackFormatError,
    StateFormatError,
    UndefinedBiasError,
    UndefinedPhaseError,
)
from .evaluation import (
    DEFAULT_WAVELENGTH_M,
    METHOD_TAGS,
    BiasStdCurves,
    TrialResult,
    circular_bias,
    circular_std,
    fit_drift,
    phase_to_displacement,
    run_monte_carlo,
)
from .ripe import (
    DEFAULT_BETA,
    PhaseSeries,
    RipeConfig,
    RipeState,
    WeightVector,
    build_weighted_reference,
    estimate_phase,
    ingest,
    interferometric_coherence,
    joint_optimal_weights,
    optimal_weights,
    ripe_init,
    ripe_step,
    run_ripe,
    run_ripe_stateful,
    wrap_phase,
)
from .simulate import (
    SLCStack,
    cholesky_lower,
    mix_seed,
    sample_coherence,
    simulate_stack,
)

__all__ = [
    "__version__",
    "AcquisitionTimeline",
    "BiasStdCurves",
    "CoherenceComponent",
    "ConfigError",
    "DEFAULT_BETA",
    "DEFAULT_WAVELENGTH_M",
    "DegenerateWindowError",
    "EigendecompositionError",
    "EmiConfig",
    "InvalidModelError",
    "METHOD_TAGS",
    "MonteCarloError",
    "PRESETS",
    "PhaseSeries",
    "RipeConfig",
    "RipeState",
    "RipekitError",
    "SICILY_C_BAND",
    "SLCStack",
    "SingularCoherenceError",
    "SingularCovarianceError",
    "StackFormatError",
    "StateFormatError",
    "TemporalCoherenceModel",
    "TrialResult",
    "UndefinedBiasError",
    "UndefinedPhaseError",
    "WeightVector",
    "build_weighted_reference",
    "cholesky_lower",
    "circular_bias",
    "circular_std",
    "covariance_matrix",
    "direct_interferogram_phase",
    "direct_phase_series",
    "emi_phases",
    "estimate_phase",
    "fit_drift",
    "get_preset",
    "ingest",
    "interferometric_coherence",
    "joint_optimal_weights",
    "mix_seed",
    "optimal_weights",
    "phase_flat",
    "phase_to_displacement",
    "ripe_init",
    "ripe_step",
    "run_monte_carlo",
    "run_ripe",
    "run_ripe_stateful",
    "sample_coherence",
    "simulate_stack",
    "wrap_phase",
]
