"""Exception types raised by itersplit."""


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation (NaN/Inf, b < a, ...)."""


class UnsupportedOperatorError(ValueError):
    """The operator cannot be propagated exactly by the requested scheme."""


class DivergenceError(RuntimeError):
    """A time integration or fixed-point iteration blew up."""
