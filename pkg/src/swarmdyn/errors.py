class SwarmError(Exception):
    """Base class for all package errors."""


class ValidationError(SwarmError, ValueError):
    """Invalid parameters, states or scenario content."""


class DomainError(ValidationError):
    """Formula evaluated outside its domain (e.g. division by zero)."""


class SingularThresholdError(DomainError):
    """The consensus threshold denominator vanishes (r == alpha)."""


class NumericalError(SwarmError, RuntimeError):
    """Integration or iterative solve failed."""


class DomainWarning(UserWarning):
    """A formula family was skipped because its domain condition fails."""
