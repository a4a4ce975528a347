"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input: malformed fraction, inadmissible (P, Q), negative step count..."""


class ComputationError(RuntimeError):
    """A numerical routine failed (eigensolver, residual check).

    ``alpha`` carries the offending (P, Q) pair when there is one.
    """

    def __init__(self, message, alpha=None):
        super().__init__(message)
        self.alpha = alpha


class InvariantError(AssertionError):
    """An internal invariant that must always hold was violated."""
