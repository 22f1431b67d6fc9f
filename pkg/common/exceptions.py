"""
Exception hierarchy for uqflow project.

Every error raised by the numerical packages derives from UqflowError. The
``exit_code`` attribute is what the management commands return to the shell.
"""

from typing import Optional, Sequence


class UqflowError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 3


class UsageError(UqflowError, ValueError):
    """Caller passed arguments the operation cannot accept."""

    exit_code = 2


class UnsupportedDimensionError(UsageError):
    """A construction is undefined for the requested state dimension."""


class ConfigError(UqflowError):
    """A scenario file failed validation."""

    exit_code = 2

    def __init__(self, message: str, errors: Optional[dict] = None):
        super().__init__(message)
        self.errors = errors or {}


class NumericalError(UqflowError):
    """A computation failed for numerical reasons."""

    exit_code = 3


class DomainError(NumericalError):
    """An elementary function or model was evaluated outside its domain."""

    def __init__(self, function: str, value: float, message: Optional[str] = None):
        self.function = function
        self.value = value
        super().__init__(message or f"{function} is undefined at constant part {value!r}")


class IntegrationError(NumericalError):
    """Numerical integration stopped before reaching the final time."""

    def __init__(self, message: str, last_good_time: float):
        super().__init__(f"{message} (last good time {last_good_time!r})")
        self.last_good_time = last_good_time


class CorrectorError(NumericalError):
    """Differential correction did not converge."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message}: residual {residual:.3e} after {iterations} iterations")
        self.residual = residual
        self.iterations = iterations


class DecompositionError(NumericalError):
    """A matrix that must be symmetric positive definite is not."""


class FitError(NumericalError):
    """A regression design matrix is rank deficient."""


class SplitError(NumericalError):
    """A mixture split produced an invalid component."""


class EstimatorError(NumericalError):
    """A statistic is undefined for the given ensemble."""


class ContourError(NumericalError):
    """A confidence boundary is degenerate."""


class ConstructionError(NumericalError):
    """A nominal trajectory cannot be built from the requested geometry."""


class PropagationError(NumericalError):
    """One or more ensemble members failed to propagate."""

    def __init__(self, message: str, indices: Sequence[int]):
        self.indices = list(indices)
        shown = ', '.join(str(i) for i in self.indices[:10])
        more = '' if len(self.indices) <= 10 else f' (+{len(self.indices) - 10} more)'
        super().__init__(f"{message}: failing members [{shown}]{more}")


class StageError(UqflowError):
    """A study stage failed; wraps the underlying error."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, 'exit_code', 3)
        super().__init__(f"stage '{stage}' failed: {cause}")
