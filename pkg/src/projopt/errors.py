"""Exception types shared by all solvers in this package."""


class SolverError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(SolverError):
    """Operands have incompatible shapes; the message names both dimensions."""


class InvalidInputError(SolverError):
    """Unusable input: non-finite entries, empty vectors, or bad parameters."""


class InvalidBoxError(SolverError):
    """A box constraint has a lower bound above its upper bound."""


class SingularSystemError(SolverError):
    """A linear system is singular to working precision."""


class DivergedError(SolverError):
    """An iteration produced non-finite values."""


class InfeasibleSetError(SolverError):
    """The constraint set is empty or too ill-conditioned to project onto."""
