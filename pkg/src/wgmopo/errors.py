"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a model is defined."""


class NumericalError(RuntimeError):
    """An iterative solver failed to converge.

    ``detail`` carries solver state useful for diagnosis (last residual,
    bracket, best parameters so far).
    """

    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail


class NotFoundError(LookupError):
    """No solution exists in the requested window."""


class RangeError(DomainError):
    """A requested target is outside what a tuning mechanism can reach."""

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class ConfigError(ValueError):
    """A run configuration is malformed or inconsistent."""
