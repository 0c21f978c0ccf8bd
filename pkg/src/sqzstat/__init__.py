"""Generalized-ensemble thermostatistics under squeezing deformations.

Exact discrete-spectrum ensembles for an arbitrary positive deformation
of the configuration-count statistics, with fluctuation analysis, a
deformed discrete-velocity kinetic integrator, and inference of the
deformation from temperature-ratio data.
"""

from .engine import (
    ClassTable,
    DegeneracySpectrum,
    EnsembleSpec,
    ProbabilityTable,
    ThermoReport,
    characteristic_class,
    combine_independent,
    entropy_from_probabilities,
    generalized_boltzmann_factor,
    observed_mean,
    phi_and_entropies,
    phi_of,
    phi_surface_from_spectrum,
    probabilities,
    report_for,
)
from .errors import (
    DatasetError,
    DegenerateEnsembleError,
    ModelValidationError,
    SqueezeDomainError,
    StepSizeError,
)
from .squeeze import LogValue, SqueezeFamily, squeeze_log, squeeze_slope, unsqueeze_log
from .thermo import (
    EnvironmentSplit,
    ThermoPoint,
    VariablePair,
    conjugates_from_phi,
    euler_residual,
    gibbs_duhem_residual,
)

__version__ = "0.1.0"

__all__ = [
    "ClassTable",
    "DatasetError",
    "DegeneracySpectrum",
    "DegenerateEnsembleError",
    "EnsembleSpec",
    "EnvironmentSplit",
    "LogValue",
    "ModelValidationError",
    "ProbabilityTable",
    "SqueezeDomainError",
    "SqueezeFamily",
    "StepSizeError",
    "ThermoPoint",
    "ThermoReport",
    "VariablePair",
    "characteristic_class",
    "combine_independent",
    "conjugates_from_phi",
    "entropy_from_probabilities",
    "euler_residual",
    "generalized_boltzmann_factor",
    "gibbs_duhem_residual",
    "observed_mean",
    "phi_and_entropies",
    "phi_of",
    "phi_surface_from_spectrum",
    "probabilities",
    "report_for",
    "squeeze_log",
    "squeeze_slope",
    "unsqueeze_log",
]
