"""Exception types shared across the package."""


class KmaxentError(Exception):
    """Base class for every error raised by this package."""


class InvalidOrderError(KmaxentError):
    """Requested model order is incompatible with the data length."""


class InvalidDataError(KmaxentError):
    """Input samples are empty, too short, or contain non-finite values."""


class NotPositiveDefiniteError(KmaxentError):
    """A matrix that must be positive definite failed to factor."""


class InvalidHyperparameterError(KmaxentError):
    """Hyperparameter outside its admissible open range."""


class InvalidModelError(KmaxentError):
    """Rational filter model violates a structural requirement."""


class DataParseError(KmaxentError):
    """User-supplied data file could not be parsed."""


class PipelineError(KmaxentError):
    """Failure inside a named estimation-pipeline step."""

    def __init__(self, step: str, message: str):
        self.step = step
        super().__init__(f"step '{step}': {message}")
