"""Exception types shared across the engine."""


class ValidationError(ValueError):
    """Input failed a domain invariant. The message names the offending field."""


class DimensionMismatchError(ValidationError):
    """Vector/matrix dimensions disagree between two inputs."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite intermediate or result."""


class InsufficientDataError(ValueError):
    """An operation needs more data than the caller supplied (e.g. empty history)."""


class TrainingDivergedError(NumericError):
    """Optimization hit a non-finite loss; carries the iteration index."""

    def __init__(self, iteration: int, message: str | None = None):
        self.iteration = iteration
        super().__init__(message or f"non-finite loss at iteration {iteration}")
