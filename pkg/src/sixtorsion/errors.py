"""Exception types shared across the package."""


class SixTorsionError(Exception):
    """Base class for errors raised by this package."""


class DomainError(ValueError, SixTorsionError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(ValueError, SixTorsionError):
    """Argument or cache outside the supported numeric range."""


class ResourceError(MemoryError, SixTorsionError):
    """Requested work exceeds a configured resource budget."""


class IntegrityError(RuntimeError, SixTorsionError):
    """An internal consistency check failed."""


class DataError(ValueError, SixTorsionError):
    """Malformed or incomplete input data."""
