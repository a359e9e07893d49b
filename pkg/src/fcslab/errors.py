"""Exception types raised across fcslab."""


class FCSLabError(Exception):
    """Base class for all fcslab errors."""


class ValidationError(FCSLabError, ValueError):
    """Input failed a structural check (shape, symmetry, positivity, ...)."""

    def __init__(self, message, field=None):
        self.field = field
        self.reason = message
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class DomainError(FCSLabError, ValueError):
    """A function was evaluated outside the set where it is defined."""


class ResourceError(FCSLabError, RuntimeError):
    """A dense computation would exceed the configured dimension cap."""
