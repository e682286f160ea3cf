"""Exception types shared across the package."""


class LpdistError(Exception):
    """Base class for all package errors."""


class DomainError(LpdistError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedError(LpdistError, ValueError):
    """The requested parameter combination has no implemented theory (e.g. LDP for p < 2)."""


class ConvergenceError(LpdistError, ArithmeticError):
    """An iterative numerical procedure failed to reach its tolerance."""


class ResourceError(LpdistError, MemoryError):
    """A request would exceed the configured memory budget."""
