"""Riemannian optimization on the simplex of positive definite matrices.

The central object is the MatrixSimplex manifold: K-tuples of n x n
symmetric (or Hermitian) positive definite matrices summing to the
identity, with the affine-invariant product metric, tangent projection,
retraction, and gradient/Hessian conversion. On top of it sit three
solvers (steepest descent, conjugate gradients, trust region), a small
library of benchmark costs, and numerical self-check utilities.
"""

from .errors import (
    BoundaryHit,
    ConfigError,
    IllConditioned,
    InvalidInput,
    LineSearchFail,
    MatrixSimplexError,
    NotPositiveDefinite,
    NotSymmetric,
    Overflow,
    SumConstraintViolated,
)
from .linalg import (
    expm_sym,
    solve_sum_conjugation,
    solve_sum_conjugation_dense,
    spd_sqrt_invsqrt,
    symm,
)
from .manifold import MatrixSimplex
from .problems import (
    NearestPoint,
    PovmMle,
    WeightedLogDet,
    nearest_point_diagonal_oracle,
    project_to_simplex,
)
from .solvers import (
    IterateRecord,
    IterateTrace,
    SolverConfig,
    armijo_linesearch,
    solve,
    solve_rcg,
    solve_rsd,
    solve_rtr,
    truncated_cg,
)

__version__ = "0.1.0"

__all__ = [
    "MatrixSimplex",
    "NearestPoint",
    "WeightedLogDet",
    "PovmMle",
    "SolverConfig",
    "IterateRecord",
    "IterateTrace",
    "solve",
    "solve_rsd",
    "solve_rcg",
    "solve_rtr",
    "armijo_linesearch",
    "truncated_cg",
    "symm",
    "expm_sym",
    "spd_sqrt_invsqrt",
    "solve_sum_conjugation",
    "solve_sum_conjugation_dense",
    "project_to_simplex",
    "nearest_point_diagonal_oracle",
    "MatrixSimplexError",
    "InvalidInput",
    "NotSymmetric",
    "NotPositiveDefinite",
    "SumConstraintViolated",
    "IllConditioned",
    "Overflow",
    "LineSearchFail",
    "BoundaryHit",
    "ConfigError",
]
