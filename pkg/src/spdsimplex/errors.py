"""Exception types shared across the package."""


class MatrixSimplexError(Exception):
    """Base class for every error this package raises deliberately."""


class InvalidInput(MatrixSimplexError):
    """Shape, dtype, or precondition violation on a public operation."""


class NotSymmetric(InvalidInput):
    """A matrix that must be symmetric/Hermitian is not, beyond tolerance."""

    def __init__(self, message, part=None, residual=None):
        super().__init__(message)
        self.part = part
        self.residual = residual


class NotPositiveDefinite(MatrixSimplexError):
    """Smallest eigenvalue below the positive-definiteness floor."""

    def __init__(self, message, part=None, min_eigenvalue=None):
        super().__init__(message)
        self.part = part
        self.min_eigenvalue = min_eigenvalue


class SumConstraintViolated(MatrixSimplexError):
    """Parts do not sum to the identity (points) or to zero (tangents)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IllConditioned(MatrixSimplexError):
    """Iterative linear solver failed to reach its tolerance within the cap."""


class Overflow(MatrixSimplexError):
    """Retraction step too large: matrix-exponential argument above the cap."""


class LineSearchFail(MatrixSimplexError):
    """Backtracking exhausted without sufficient decrease."""


class BoundaryHit(MatrixSimplexError):
    """A generated instance has its solution on the boundary and is rejected."""


class ConfigError(MatrixSimplexError):
    """Run-configuration file failed validation; message carries the key path."""
