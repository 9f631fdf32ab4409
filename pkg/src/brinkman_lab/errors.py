"""Exception hierarchy.

Two families matter to callers: configuration problems (bad input files,
unparseable arguments) and solver problems (a numerical precondition or
invariant failed at run time).  The command-line front end maps them to
distinct exit codes.
"""


class BrinkmanError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(BrinkmanError):
    """Malformed or incomplete run configuration."""


class SolverError(BrinkmanError):
    """A numerical routine could not honour its contract."""


class InvalidParams(SolverError, ValueError):
    pass


class OutOfRange(SolverError, ValueError):
    pass


class NonFiniteField(SolverError, ValueError):
    pass


class EmptyMask(SolverError, ValueError):
    pass


class CflViolation(SolverError):
    pass


class NoBracket(SolverError):
    pass


class BoundViolation(SolverError):
    pass


class NoConvergence(SolverError):
    pass


class NoContraction(SolverError):
    pass


class OutOfSpan(SolverError):
    pass


class SeedTooClose(SolverError):
    pass


class BandTooWide(SolverError):
    pass


class BandTooNarrow(SolverError):
    pass


class GridMismatch(SolverError):
    pass


class ConvergenceAssertionError(BrinkmanError):
    """The k-ladder failed a monotonicity check."""
