"""Photon-pair generation by spontaneous four-wave mixing in a lossy
microring resonator: pump dynamics, perturbative joint spectra,
time-domain propagators, and pair-statistics observables."""

from .errors import (
    AccuracyError,
    AliasingWarning,
    ConfigError,
    CoverageError,
    DivergenceError,
    GridMismatchError,
    InvalidParameterError,
    RingSfwmError,
    UndefinedAnalysisError,
)
from .model import (
    EPSILON_0,
    HBAR,
    DerivedRates,
    MaterialEstimate,
    NonlinearCouplings,
    RingSystem,
    derive_rates,
    estimate_nonlinear_couplings,
)
from .numerics import Grid2D, SpectralGrid, TimeGrid
from .perturbative import (
    JsiResult,
    PairObservables,
    PumpPairFunction,
    ResponseKernels,
    SchmidtResult,
    jsi_closed_form,
    mixed_pair_amplitudes,
    observables,
    pair_amplitude,
    pump_pair_function,
    r_closed_form,
    response_kernels,
    schmidt_analysis,
)
from .pump import (
    PumpField,
    PumpSpec,
    incoming_spectrum,
    intracavity_spectrum,
    pump_time_evolution,
)

__version__ = "0.1.0"
