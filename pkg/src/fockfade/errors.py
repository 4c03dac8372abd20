"""Exception hierarchy shared across the package."""


class FockfadeError(Exception):
    """Base class for all package errors."""


class DomainError(FockfadeError, ValueError):
    """An argument is outside its mathematical domain."""


class ConstructionError(FockfadeError, ValueError):
    """A state recipe is degenerate or inconsistent."""


class UnsupportedFormError(FockfadeError):
    """The operation is only defined for a restricted state form."""


class TruncationError(FockfadeError):
    """Truncation cutoffs were too small (trace left the allowed window)."""


class NoSolutionError(FockfadeError):
    """A solver target is unreachable."""
