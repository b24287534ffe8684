"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the region where a quantity is defined or claimed.

    Typical causes are a spectrum outside the positive cone, or a vanishing
    denominator.
    """


class GeometryError(ValueError):
    """A discrete curve or surface violates a structural requirement."""


class NumericalError(RuntimeError):
    """An iterative numerical procedure failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConstraintError(ValueError):
    """A gradient tensor does not satisfy the critical-point constraint."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
