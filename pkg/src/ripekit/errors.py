"""Exception types raised by ripekit."""


class RipekitError(Exception):
    """Base class for all ripekit errors."""


class InvalidModelError(RipekitError, ValueError):
    """A coherence model violates its invariants or is numerically unusable."""


class DegenerateWindowError(RipekitError):
    """An estimation window is degenerate (zero vector / zero-power row)."""


class UndefinedPhaseError(RipekitError):
    """An interferogram inner product vanished; its phase is undefined."""


class SingularCovarianceError(RipekitError):
    """The weight-solve covariance matrix is singular."""


class SingularCoherenceError(RipekitError):
    """The EMI magnitude matrix is singular after regularization."""


class EigendecompositionError(RipekitError):
    """The eigensolver residual check failed."""


class UndefinedBiasError(RipekitError):
    """Residual phasors cancelled exactly; the circular bias is undefined."""


class MonteCarloError(RipekitError):
    """Too many trials errored for the run to be trustworthy."""


class StackFormatError(RipekitError):
    """A stack dump could not be parsed.

    Carries the byte offset at which parsing failed.
    """

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class StateFormatError(RipekitError):
    """A persisted estimator state could not be parsed or does not match."""


class ConfigError(RipekitError):
    """A run configuration is invalid.

    Carries the 1-based line number of the offending entry when the
    configuration came from a file.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
