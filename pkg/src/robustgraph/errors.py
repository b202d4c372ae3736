"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class NumericalError(RuntimeError):
    """A numerical routine failed (SVD non-convergence, non-SPD solve, ...)."""
