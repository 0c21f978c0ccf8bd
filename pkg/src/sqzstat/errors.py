"""Exception types shared across the package.

The CLI maps each class to a distinct exit code, so keep the taxonomy
small and stable.
"""


class SqueezeDomainError(ValueError):
    """Input outside the domain of a squeezing family (non-finite, or an
    inverse evaluated where only the excluded state exists)."""


class DegenerateEnsembleError(ValueError):
    """Every subclass of the spectrum was excluded by the cutoff; no
    characteristic class can be formed."""


class ModelValidationError(ValueError):
    """Bad model parameters or a malformed spectrum/model file."""


class DatasetError(ValueError):
    """Malformed equilibrium-ratio or density dataset."""


class StepSizeError(RuntimeError):
    """Kinetic integrator became unstable (negativity/NaN) at the given dt."""
