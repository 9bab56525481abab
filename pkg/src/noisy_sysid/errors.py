"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class SysIdError(Exception):
    """Base class for every error raised by the package."""


class InvalidInputError(SysIdError, ValueError):
    """Malformed matrices, dimensions, or arguments."""


class SingularGramError(SysIdError):
    """A matrix that must be inverted is singular or too ill-conditioned."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class CorrectionSingularError(SingularGramError):
    """The bias-compensation correction factor could not be inverted."""


class NotPSDError(SysIdError, ValueError):
    def __init__(self, min_eigenvalue: float):
        super().__init__(f"matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


class UnstableSystemError(SysIdError):
    def __init__(self, spectral_radius: float):
        super().__init__(f"A is not stable: spectral radius {spectral_radius:.6g} >= 1")
        self.spectral_radius = spectral_radius


class NotApplicableError(SysIdError):
    """Operation undefined for this kind of system (e.g. autonomous)."""


class DiagnosticsUnavailableError(SysIdError):
    """Realized noise was not recorded for this trajectory."""


class InsufficientDataError(SysIdError, ValueError):
    """Trajectory too short for the requested estimator."""


class BelowThresholdError(SysIdError):
    """A theoretical bound was requested below its sample-size threshold."""

    def __init__(self, T: int, threshold: float):
        super().__init__(f"T={T} is below the sample-size threshold {threshold:.6g}")
        self.T = T
        self.threshold = threshold


class AssumptionViolationError(SysIdError):
    pass
