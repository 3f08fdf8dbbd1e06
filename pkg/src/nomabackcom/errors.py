"""Exception hierarchy shared by the numerical engines and the CLI."""


class NomaBackComError(Exception):
    """Base class for all package errors."""


class InvalidShape(NomaBackComError, ValueError):
    """Nakagami shape parameter outside its admissible range."""


class PoleAtC(NomaBackComError, ValueError):
    """Hypergeometric lower parameter c is a non-positive integer."""


class NonConvergent(NomaBackComError, ArithmeticError):
    """A series or transformation failed to converge."""


class DegenerateMatch(NomaBackComError, ArithmeticError):
    """Moment matching produced a non-positive variance."""


class EmptySample(NomaBackComError, ValueError):
    """Goodness-of-fit test called with too few samples."""


class InsufficientTrials(NomaBackComError, ValueError):
    """Monte Carlo run requested with fewer trials than the minimum."""


class EmptyGrid(NomaBackComError, ValueError):
    """Search or sweep grid contains no admissible points."""


class ConfigParseError(NomaBackComError):
    """Run configuration is not syntactically valid."""


class ConfigValidationError(NomaBackComError, ValueError):
    """Run configuration parsed but violates a constraint."""
