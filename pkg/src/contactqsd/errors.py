"""Exception taxonomy shared across the package.

Usage errors map to CLI exit code 2, numerical / degenerate-sample errors
to exit code 3.
"""


class ContactQsdError(Exception):
    """Base class for all package errors."""


class UsageError(ContactQsdError):
    """Invalid arguments, mismatched dimensions, unwritable paths, etc."""


class SizeError(UsageError):
    """Requested truncated state space exceeds the supported size."""


class DegenerateSampleError(ContactQsdError):
    """A conditioned estimate has an empty survivor sample.

    Carries the survival estimate observed (typically 0.0) so callers can
    report how dead the sample was.
    """

    def __init__(self, message, survival_estimate=0.0):
        super().__init__(message)
        self.survival_estimate = survival_estimate


class InsufficientDataError(ContactQsdError):
    """Too few usable points to run a fit."""


class NumericalError(ContactQsdError):
    """An iterative solver failed to converge; carries the last residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
