"""Exception types raised across denseflow.

Every error derives from :class:`DenseFlowError` so callers (and the CLI)
can catch library failures in one place. ``exit_code`` is what the CLI
returns when the error escapes a subcommand.
"""


class DenseFlowError(Exception):
    """Base class for all library errors."""

    kind = "error"
    exit_code = 1


class ShapeError(DenseFlowError, ValueError):
    kind = "shape error"


class DegenerateInputError(DenseFlowError, ValueError):
    kind = "degenerate input"


class ParameterError(DenseFlowError, ValueError):
    kind = "parameter error"


class FormatError(DenseFlowError, ValueError):
    kind = "format error"


class EncodingError(DenseFlowError, ValueError):
    kind = "encoding error"


class IngestionError(DenseFlowError, OSError):
    kind = "ingestion error"


class ConsistencyError(DenseFlowError, ValueError):
    kind = "consistency error"


class EmptyDomainError(DenseFlowError, ValueError):
    kind = "empty domain"


class NumericalInstabilityError(DenseFlowError, ArithmeticError):
    """A solver produced a non-finite value.

    ``iteration`` is the 1-based iteration at which it was detected and
    ``level`` the pyramid level, when the failure happened inside a
    coarse-to-fine run.
    """

    kind = "numerical instability"
    exit_code = 2

    def __init__(self, message, iteration=None, level=None):
        super().__init__(message)
        self.iteration = iteration
        self.level = level
