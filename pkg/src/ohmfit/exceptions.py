"""Exception types raised across the package.

Everything derives from OhmfitError so callers can catch the whole family;
config/format problems additionally derive from ValueError so they behave
like ordinary bad-argument errors in scripts.
"""


class OhmfitError(Exception):
    """Base class for all errors raised by this package."""


class ProfileFormatError(OhmfitError, ValueError):
    """A current-profile CSV could not be parsed. Carries the line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class UndefinedSnrError(OhmfitError, ValueError):
    """SNR is undefined for the given signal level (nonpositive amplitude)."""


class ConfigError(OhmfitError, ValueError):
    """An experiment or CLI config is malformed, incomplete, or has unknown keys."""


class SingularModelError(OhmfitError):
    """The regressor matrix carries no information (e.g. all-zero current)."""


class SingularMatrixError(OhmfitError):
    """A matrix required to be SPD is singular or indefinite.

    The message names the offending eigenvalue.
    """


class DegenerateEigengapError(OhmfitError):
    """The two smallest eigenvalues are too close to identify a solution."""


class VerticalSolutionError(OhmfitError):
    """The minimizing direction has a zero measurement component (V22 == 0)."""


class ColdStartError(OhmfitError):
    """A recursive estimator was asked for an estimate before any usable data."""


class NumericalFailureError(OhmfitError):
    """A recursive update failed numerically. Carries the batch index."""

    def __init__(self, message: str, batch_index: int | None = None):
        if batch_index is not None:
            message = f"batch {batch_index}: {message}"
        super().__init__(message)
        self.batch_index = batch_index
