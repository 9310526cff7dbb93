"""Exception types shared across the package.

The command line maps these onto exit codes, so every failure raised by the
library should be one of them (or a plain ``ValueError`` subclass).
"""


class ValidationError(ValueError):
    """Input outside the domain of an operation (shape, norm, tolerance)."""


class CapacityError(ValidationError):
    """A requested Fock truncation exceeds the configured dimension cap."""


class InconclusiveError(RuntimeError):
    """The available certificates do not settle the question asked."""


class NotDominatedError(InconclusiveError):
    """The intertwiner equations are not solvable at the requested tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class NumericalError(RuntimeError):
    """An iterative method failed to converge or a solver broke down."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
