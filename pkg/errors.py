"""Error types for sbfctl.

Every error carries a ``code`` (the enum name reported by the CLI) and keyword
details. Validation problems map to exit status 2, numerical failures to 1.
"""
from typing import Any


class SbfError(Exception):
    """Base class for all anticipated sbfctl failures."""

    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def one_line(self) -> str:
        """Format as a single machine-parsable line."""
        extra = " ".join(f"{k}={v}" for k, v in sorted(self.details.items()))
        line = f"{self.code}: {self.message}"
        return f"{line} {extra}" if extra else line


class ValidationError(SbfError, ValueError):
    """Input or precondition violation."""

    exit_code = 2


class NumericalError(SbfError, ArithmeticError):
    """A computation could not deliver a certified result."""

    exit_code = 1


# Validation errors

class ConfigError(ValidationError):
    pass


class InvalidFamily(ValidationError):
    pass


class DuplicatePoints(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class InvalidPerturbation(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class DegreeOverflow(ValidationError):
    pass


# Numerical errors

class RefinementStall(NumericalError):
    pass


class EmptyCell(NumericalError):
    pass


class PoleAtInteger(NumericalError):
    pass


class QuadratureNonConvergence(NumericalError):
    pass


class SeriesNonConvergence(NumericalError):
    pass


class DivergentSeries(NumericalError):
    pass


class InfeasibleMoments(NumericalError):
    pass


class NegativeWeight(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class SearchBudgetExhausted(NumericalError):
    pass


class ZeroCoefficient(NumericalError):
    pass


class FitUnstable(NumericalError):
    pass


class InconclusiveTrend(NumericalError):
    pass


class ConditionFailed(NumericalError):
    pass
