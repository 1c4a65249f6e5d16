"""Exception types shared across the package."""


class RaftlimError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(RaftlimError):
    """A precondition on user-supplied arguments was violated."""


class ConfigError(RaftlimError):
    """Configuration file could not be parsed or failed strict validation."""


class UnsupportedOperationError(RaftlimError):
    """The requested operation is undefined for this backend or input."""


class SolverFailure(RaftlimError):
    """An iterative linear solve did not converge.

    Parameters
    ----------
    label : str
        Name of the linear system that failed.
    iterations : int
        Iterations performed before giving up.
    residual : float
        Relative residual at the point of failure.
    """

    def __init__(self, label, iterations, residual):
        self.label = label
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            "linear solve '%s' did not converge: %d iterations, "
            "relative residual %.3e" % (label, iterations, residual)
        )


class NumericalBlowup(RaftlimError):
    """A field stopped being finite during time stepping.

    Carries the name of the first offending field and the time at which
    the problem was detected.
    """

    def __init__(self, field, t):
        self.field = field
        self.t = t
        super().__init__(
            "non-finite values in field '%s' at t=%.6g" % (field, t)
        )
