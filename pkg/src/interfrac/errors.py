"""Exception hierarchy shared across the package.

Exit codes used by the command line front end are attached to the classes so
that every error category maps to a stable, scriptable status.
"""


class InterfracError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(InterfracError, ValueError):
    """An input violates a documented invariant (raised before any solve)."""

    exit_code = 2


class SolverError(InterfracError, RuntimeError):
    """A discrete system could not be solved reliably."""

    exit_code = 3


class ConvergenceError(SolverError):
    """An iterative scheme failed to reach its tolerance.

    Carries the iteration trace so the failure can be diagnosed.
    """

    exit_code = 3

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class ThresholdError(InterfracError):
    """A cross-check ran to completion but exceeded its tolerance."""

    exit_code = 4
