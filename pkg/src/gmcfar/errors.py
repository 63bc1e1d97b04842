"""Exception types shared across the package."""


class GmCfarError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(GmCfarError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class QuantileOverflowError(GmCfarError, OverflowError):
    """A quantile evaluates beyond the representable floating-point range."""


class UnsupportedConfigurationError(GmCfarError, ValueError):
    """A closed form is not available for this configuration; use the
    quadrature oracle instead."""


class NumericalFailureError(GmCfarError, RuntimeError):
    """A numerical routine failed to meet its requested tolerance.

    ``achieved`` carries the best error bound (or bracket) obtained.
    """

    def __init__(self, message: str, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class UnreachableTargetError(NumericalFailureError):
    """No threshold multiplier can reach the requested false-alarm rate
    (the detector's Pfa does not depend on tau in this configuration)."""


class InconsistentReportError(GmCfarError, RuntimeError):
    """An adjudication report is internally inconsistent (its oracles
    disagree) and cannot be used to dispatch Pfa evaluations."""
