"""Exception types shared across the package."""


class PolyBoltzError(Exception):
    """Base class for all library errors."""


class ParameterError(PolyBoltzError, ValueError):
    """An argument violates a documented parameter constraint."""


class DomainError(PolyBoltzError, ValueError):
    """A function was evaluated outside its mathematical domain."""


class PreconditionError(PolyBoltzError, ValueError):
    """An input field does not satisfy an operation's precondition."""


class QuadratureError(PolyBoltzError, ArithmeticError):
    """A quadrature integrand produced a non-finite value."""


class BasisError(PolyBoltzError, ValueError):
    """The Galerkin basis could not be constructed."""


class ConfigError(PolyBoltzError, ValueError):
    """A run configuration could not be parsed or validated."""
