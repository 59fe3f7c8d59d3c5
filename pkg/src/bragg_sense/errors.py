"""Exception hierarchy and warning categories."""


class BraggSenseError(Exception):
    """Base class for all package errors."""


class DomainError(BraggSenseError, ValueError):
    """A physical parameter is outside its admissible range."""


class ConfigurationError(BraggSenseError, ValueError):
    """A numerical or run configuration is invalid."""


class NumericError(BraggSenseError, RuntimeError):
    """A numerical procedure failed or produced non-finite values."""


class IntegrationError(NumericError):
    """The ODE integrator failed; carries the time reached."""

    def __init__(self, message, lam_reached=None):
        super().__init__(message)
        self.lam_reached = lam_reached


class WorkingPointError(NumericError):
    """The uncertainty formula is evaluated at a singular working point."""


class SingularStateError(NumericError):
    """The input state has no usable polarization (e.g. over-twisted OAT)."""


class OptimizerError(NumericError):
    """A scalar optimization failed to bracket or converge."""


class PerturbativeRangeWarning(UserWarning):
    """Coupling strength outside the validated perturbative range."""


class OverlapRegimeWarning(UserWarning):
    """Exit-port wavepackets may overlap; cropped signals unreliable."""
