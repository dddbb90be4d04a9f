"""Exception types shared across the package."""


class PairrankError(Exception):
    """Base class for package-specific failures."""


class UnidentifiableModelError(PairrankError, ValueError):
    """The comparison graph is disconnected, so score differences across
    components are not determined by the data."""


class ConvergenceError(PairrankError, RuntimeError):
    """The optimizer ran out of iterations. Carries the last iterate."""

    def __init__(self, message: str, last_scores=None, last_grad_norm=None):
        super().__init__(message)
        self.last_scores = last_scores
        self.last_grad_norm = last_grad_norm


class SingularHessianError(PairrankError, RuntimeError):
    """The augmented Hessian could not be inverted, even after the ridge retry."""


class UndefinedCorrelationError(PairrankError, ValueError):
    """Correlation requested on an input with zero variance."""


class DatasetFormatError(PairrankError, ValueError):
    """A comparison-matrix CSV failed to parse. Carries the 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
