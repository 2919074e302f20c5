"""Exception types shared across the package."""


class DiracError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(DiracError, ValueError):
    """An argument violates a documented precondition."""


class ShapeMismatchError(DiracError, ValueError):
    """Tensor or grid shapes are inconsistent."""


class UndefinedCorrelationError(InvalidArgumentError):
    """Pearson correlation requested on zero-variance data."""
