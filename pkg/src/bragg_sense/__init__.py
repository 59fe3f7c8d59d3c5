"""Atom-optics transfer matrices, interference signals and phase uncertainty
of a first-order Bragg Mach-Zehnder interferometer."""

__version__ = "0.1.0"

from .errors import (
    BraggSenseError,
    ConfigurationError,
    DomainError,
    IntegrationError,
    NumericError,
    OptimizerError,
    OverlapRegimeWarning,
    PerturbativeRangeWarning,
    SingularStateError,
    WorkingPointError,
)
from .mzi_core import (
    MziTransfer,
    ScriptQuantities,
    SequenceParams,
    ideal_scripts,
    mzi_transfer,
    position_distribution,
    script_quantities,
    signal_cropped,
    signal_full,
)
from .optimizer import OptResult, optimize_inclination, optimize_twisting
from .pulse_analytic import (
    PulseParams,
    PulseTransfer,
    adjacent_couplings,
    pert_transfer,
    vs_coefficients,
)
from .pulse_numeric import (
    EnvelopeSpec,
    evolve_pulse,
    main_block,
    numeric_transfer,
    reflectivity_profile,
)
from .sensitivity import (
    UncertaintyResult,
    uncertainty_general,
    uncertainty_oat,
    uncertainty_vs_only,
)
from .spin_states import (
    OatParams,
    SpinMoments,
    css_moments,
    dicke_moments,
    initial_inclination,
    oat_moments,
    optimal_twisting,
    squeezing_parameter,
)
from .units_grid import MomentumDistribution, UnitConvention, integrate, make_gaussian_mode

__all__ = [
    "BraggSenseError", "ConfigurationError", "DomainError", "IntegrationError",
    "NumericError", "OptimizerError", "OverlapRegimeWarning",
    "PerturbativeRangeWarning", "SingularStateError", "WorkingPointError",
    "MomentumDistribution", "UnitConvention", "integrate", "make_gaussian_mode",
    "PulseParams", "PulseTransfer", "vs_coefficients", "pert_transfer",
    "adjacent_couplings",
    "EnvelopeSpec", "evolve_pulse", "main_block", "numeric_transfer",
    "reflectivity_profile",
    "SequenceParams", "MziTransfer", "ScriptQuantities", "mzi_transfer",
    "signal_full", "signal_cropped", "script_quantities", "ideal_scripts",
    "position_distribution",
    "SpinMoments", "OatParams", "css_moments", "oat_moments",
    "squeezing_parameter", "optimal_twisting", "initial_inclination",
    "dicke_moments",
    "UncertaintyResult", "uncertainty_vs_only", "uncertainty_general",
    "uncertainty_oat",
    "OptResult", "optimize_inclination", "optimize_twisting",
]
