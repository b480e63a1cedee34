"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input that violates a documented precondition (bad file, bad size, bad q)."""


class InvariantViolation(RuntimeError):
    """An internal invariant failed. Always indicates a bug or a corrupted input."""


class ConvergenceTimeout(RuntimeError):
    """Raised when the coloring game hits ``max_rounds`` before every player is satisfied.

    The partial run is attached as ``result`` so callers can inspect the trajectory.
    """

    def __init__(self, message, result=None, seed=None):
        super().__init__(message)
        self.result = result
        self.seed = seed
