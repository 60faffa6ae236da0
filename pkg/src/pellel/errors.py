"""Exception types shared across the package."""


class PellelError(Exception):
    """Base class for all library errors."""


class ValidationError(PellelError, ValueError):
    """Bad argument or an input violating a documented precondition."""


class ResolutionError(PellelError):
    """Grid too coarse for the requested domain (no interior nodes)."""


class UnsupportedDomainError(PellelError):
    """Domain shape or dimension outside the supported set."""


class SolverError(PellelError):
    """Iterative solve failed in a way the caller must handle."""


class NotInRangeError(SolverError):
    """Right-hand side is (numerically) orthogonal to the operator range."""
