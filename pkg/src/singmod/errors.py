class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


class PrecisionError(RuntimeError):
    """Requested accuracy could not be reached within the precision cap."""


class ResourceError(RuntimeError):
    """Request exceeds a documented size or enumeration budget."""
