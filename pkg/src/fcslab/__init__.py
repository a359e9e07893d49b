"""Counting statistics of energy exchange with a confined thermal reservoir."""

from .asymptotics import (
    LimitReport,
    ScanResult,
    calF_limit,
    calF_zero_coupling,
    cesaro_fcs,
    double_limit_fcs,
    fcs_limit_idealized,
    g_functions_continuation,
    midline_residual,
    scan,
)
from .builders import NamedBuilder, build_named_model, fixture_q1r3
from .errors import DomainError, FCSLabError, ResourceError, ValidationError
from .fcs import (
    AtomicMeasure,
    calF,
    char_function,
    fcs_reservoir_direct,
    fcs_reservoir_modular,
    fcs_system,
    kolmogorov_distance,
    measure_moment,
)
from .linalg import (
    DensityMatrix,
    HermitianObservable,
    SpectralResolution,
    gibbs_state,
    heisenberg_evolve,
    matrix_function,
    spectral_resolution,
)
from .model import (
    OpenSystemModel,
    build_model,
    first_law_residual,
    flux_observables,
    heat_R,
    heat_S,
)

__version__ = "0.1.0"
