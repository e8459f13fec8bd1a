"""Exception types raised by the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ConvergenceError(ArithmeticError):
    """A series did not reach its tolerance within the allowed number of terms."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature could not meet the requested tolerance."""


class ModelMismatch(ValueError):
    """The model parameters do not match the requested initial-condition branch."""


class SchemeError(ValueError):
    """Invalid discretization scheme settings."""


class ConfigError(ValueError):
    """Malformed configuration file or command-line settings."""
