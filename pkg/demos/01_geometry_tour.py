"""Tour of the matrix-simplex geometry.

Builds the manifold of K positive definite matrices summing to the
identity, then walks through the core operations: validation, the
affine-invariant metric, tangent projection, and the exponential-style
retraction, printing the numerical residuals of the defining identities
along the way.
"""

import numpy as np

from spdsimplex import MatrixSimplex, linalg

rng = np.random.default_rng(0)
man = MatrixSimplex(n=4, K=3)
print(man, "with dimension", man.dim)

# a random point: three SPD 4x4 matrices summing to the identity
x = man.random_point(rng)
man.validate_point(x)
print("\nrandom point: part traces", np.trace(x, axis1=-2, axis2=-1).round(4),
      "| sum-to-identity defect", f"{man.feasibility_defect(x):.2e}")

# project an arbitrary ambient tuple onto the tangent space
z = rng.standard_normal((man.K, man.n, man.n))
xi = man.project(x, z)
print("\nprojection of a random ambient tuple:")
print("  parts sum to zero:   ", f"{linalg.frob_norm(xi.sum(axis=0)):.2e}")
print("  projecting twice:    ",
      f"{linalg.frob_norm(man.project(x, xi) - xi):.2e}")

# the residual z_symm - xi is metric-orthogonal to every tangent vector
eta = man.random_tangent(x, rng)
residual = linalg.symm(z) - xi
a = np.linalg.solve(x, residual)
b = np.linalg.solve(x, eta)
print("  residual orthogonal: ",
      f"{abs(np.real(np.einsum('kij,kji->', a, b))):.2e}")

# metric: positive on tangent vectors, normalized by random_tangent
print("\nmetric norm of a random unit tangent:", f"{man.norm(x, eta):.12f}")

# retraction: stays on the manifold, centered at x, first-order exact
y = man.retract(x, 0.5 * eta)
man.validate_point(y)
print("\nretraction along half a unit tangent stays on the manifold;")
print("  centering residual          ",
      f"{linalg.frob_norm(man.retract(x, np.zeros_like(x)) - x):.2e}")
for t in (1e-2, 1e-3, 1e-4):
    err = linalg.frob_norm((man.retract(x, t * eta) - x) / t - eta)
    print(f"  first-order error at t={t:.0e}  {err:.3e}")

# the scalar case n=1 is the ordinary probability simplex
man1 = MatrixSimplex(n=1, K=5)
p = man1.random_point(rng).ravel()
print("\nn=1 reduces to the probability simplex:", p.round(4), "sum", p.sum())
