"""Exception types shared across the toolkit."""


class SearangeError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(SearangeError, ValueError):
    """An argument violates an operation's preconditions."""


class SingularLoopError(SearangeError):
    """A feedback interconnection is identically singular."""


class ImproperTransferFunctionError(SearangeError):
    """A state-space realization was requested for an improper transfer function."""


class ConfigurationError(SearangeError, ValueError):
    """A parameter set or run configuration is inconsistent."""


class SingularPointError(SearangeError):
    """Evaluation requested exactly on a pole."""


class QuadratureError(SearangeError):
    """Adaptive quadrature failed to converge (e.g. non-decaying integrand)."""


class MetricsError(SearangeError):
    """A metric computation detected an internal inconsistency."""
