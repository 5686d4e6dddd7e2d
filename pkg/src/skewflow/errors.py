"""Exception hierarchy shared by every module."""


class SkewFlowError(Exception):
    """Base class for all package errors."""


class InputError(SkewFlowError, ValueError):
    """Invalid argument, state, or parameter."""


class DomainError(InputError):
    """Time pair outside the admissible set (t >= s >= 0)."""


class InvarianceError(InputError):
    """A projector family does not commute with the cocycle.

    ``witness`` holds the grid point with the largest violation.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InconsistencyError(SkewFlowError):
    """A numerical procedure observed contradictory verdicts."""


class PreconditionError(InputError):
    """A criterion's standing hypothesis (e.g. a growth envelope) fails.

    ``witness`` carries the sampled tuple that broke it.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
