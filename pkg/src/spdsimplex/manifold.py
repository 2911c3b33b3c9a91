"""Geometry of the simplex of positive definite matrices.

The manifold is the set of K-tuples (X_1, ..., X_K) of n x n symmetric
(or Hermitian) positive definite matrices with X_1 + ... + X_K = I; at
n = 1 it reduces to the interior of the probability simplex. A point is
represented as an array of shape (K, n, n), and so are tangent vectors
(parts symmetric, summing to zero) and ambient vectors (arbitrary parts).

Tangent spaces carry the sum of affine-invariant metrics,

    g_x(xi, eta) = sum_i trace(X_i^{-1} xi_i X_i^{-1} eta_i),

under which the metric-orthogonal projection of an ambient tuple z is

    P_x(z)_i = Z_i + X_i L X_i,   sum_i X_i L X_i = -sum_i Z_i,

with a single symmetric multiplier L shared across parts. Moving along a
tangent vector uses the exponential-map-style retraction: push each part
through X_i^{1/2} exp(X_i^{-1/2} xi_i X_i^{-1/2}) X_i^{1/2} (positive
definite by construction), then restore the sum constraint by congruence
with the inverse square root of the part sum. Gradients and Hessians of
a cost pull back from its Euclidean partial derivatives through the
projection and the product connection.

All operations are pure functions of their arguments (plus an explicitly
passed random generator where randomness is involved); instances hold
only configuration and are safe to share across threads.
"""

import numpy as np

from . import linalg
from .errors import (
    InvalidInput,
    NotPositiveDefinite,
    NotSymmetric,
    Overflow,
    SumConstraintViolated,
)

NEAR_BOUNDARY_EIG = 1e-9


class MatrixSimplex:
    """The manifold of K positive definite n x n matrices summing to I.

    Parameters
    ----------
    n : matrix dimension (>= 1)
    K : number of parts (>= 2)
    field : "real" (symmetric matrices) or "complex" (Hermitian matrices)
    tol_feas : Frobenius tolerance on the sum-to-identity constraint
    eps_pd : smallest admissible eigenvalue of a part
    tol_lin : relative residual tolerance of the multiplier solve
    exp_norm_cap : spectral-norm cap on retraction exponent arguments
    rng_seed : seed for the generator used when none is passed explicitly
    """

    def __init__(self, n, K, field="real", tol_feas=1e-8, eps_pd=1e-12,
                 tol_lin=1e-10, exp_norm_cap=700.0, rng_seed=None):
        if n < 1 or K < 2:
            raise InvalidInput(f"need n >= 1 and K >= 2, got n={n}, K={K}")
        if field not in ("real", "complex"):
            raise InvalidInput(f"field must be 'real' or 'complex', got {field!r}")
        if min(tol_feas, eps_pd, tol_lin) <= 0:
            raise InvalidInput("tolerances must be positive")
        self.n = int(n)
        self.K = int(K)
        self.field = field
        self.tol_feas = float(tol_feas)
        self.eps_pd = float(eps_pd)
        self.tol_lin = float(tol_lin)
        self.exp_norm_cap = float(exp_norm_cap)
        self.rng_seed = rng_seed

    @property
    def dtype(self):
        return np.complex128 if self.field == "complex" else np.float64

    @property
    def dim(self):
        """Intrinsic dimension: (K-1) n(n+1)/2 real, (K-1) n^2 complex."""
        if self.field == "complex":
            return (self.K - 1) * self.n * self.n
        return (self.K - 1) * self.n * (self.n + 1) // 2

    def __repr__(self):
        return f"MatrixSimplex(n={self.n}, K={self.K}, field={self.field!r})"

    # -- validation ------------------------------------------------------

    def _as_parts(self, a, what):
        a = np.asarray(a)
        if a.shape != (self.K, self.n, self.n):
            raise InvalidInput(
                f"{what}: expected shape {(self.K, self.n, self.n)}, got {a.shape}"
            )
        if self.field == "real" and np.iscomplexobj(a):
            raise InvalidInput(f"{what}: complex entries on a real-field manifold")
        return a.astype(self.dtype, copy=False)

    def validate_point(self, x):
        """Check shape, symmetry, positive definiteness, and the sum constraint.

        Returns the validated array; raises NotSymmetric, NotPositiveDefinite
        (with the offending part and its smallest eigenvalue), or
        SumConstraintViolated (with the residual norm).
        """
        x = self._as_parts(x, "point")
        defects = linalg.symmetry_defect(x)
        worst = int(np.argmax(defects))
        if defects[worst] > linalg.SYMMETRY_TOL:
            raise NotSymmetric(
                f"point part {worst} asymmetric: relative defect {defects[worst]:.3e}",
                part=worst, residual=float(defects[worst]),
            )
        eigs = np.linalg.eigvalsh(x)
        mins = eigs.min(axis=-1)
        worst = int(np.argmin(mins))
        if mins[worst] < self.eps_pd:
            raise NotPositiveDefinite(
                f"point part {worst} not positive definite: "
                f"smallest eigenvalue {mins[worst]:.3e} < {self.eps_pd:.1e}",
                part=worst, min_eigenvalue=float(mins[worst]),
            )
        residual = linalg.frob_norm(x.sum(axis=0) - np.eye(self.n))
        if residual > self.tol_feas:
            raise SumConstraintViolated(
                f"parts sum to identity only within {residual:.3e} "
                f"(tolerance {self.tol_feas:.1e})",
                residual=residual,
            )
        return x

    def validate_tangent(self, x, xi):
        """Check shape, per-part symmetry, and the sum-to-zero constraint."""
        xi = self._as_parts(xi, "tangent")
        defects = linalg.symmetry_defect(xi)
        worst = int(np.argmax(defects))
        if defects[worst] > linalg.SYMMETRY_TOL:
            raise NotSymmetric(
                f"tangent part {worst} asymmetric: relative defect {defects[worst]:.3e}",
                part=worst, residual=float(defects[worst]),
            )
        scale = max(1.0, float(np.linalg.norm(xi, axis=(-2, -1)).max()))
        residual = linalg.frob_norm(xi.sum(axis=0))
        if residual > self.tol_feas * scale:
            raise SumConstraintViolated(
                f"tangent parts sum to {residual:.3e}, not zero", residual=residual,
            )
        return xi

    def is_near_boundary(self, x):
        """True if some part has an eigenvalue at or below the boundary flag level."""
        return bool(np.linalg.eigvalsh(x).min() <= NEAR_BOUNDARY_EIG)

    def feasibility_defect(self, x):
        """Frobenius distance of the part sum from the identity."""
        return linalg.frob_norm(np.asarray(x).sum(axis=0) - np.eye(self.n))

    def renormalize(self, x):
        """Restore the sum constraint by congruence with the sum's inverse root.

        Used to repair feasibility drift on long optimization runs; for a
        point already on the manifold this is the identity up to round-off.
        """
        x = np.asarray(x)
        _, sinv = linalg.spd_sqrt_invsqrt(linalg.symm(x.sum(axis=0)), self.eps_pd)
        return linalg.symm(sinv @ x @ sinv)

    # -- metric and projection -------------------------------------------

    def inner(self, x, xi, eta):
        """Riemannian inner product sum_i trace(X_i^{-1} xi_i X_i^{-1} eta_i)."""
        x = self._as_parts(x, "point")
        xi = self._as_parts(xi, "tangent")
        eta = self._as_parts(eta, "tangent")
        a = np.linalg.solve(x, xi)
        b = np.linalg.solve(x, eta)
        return float(np.real(np.einsum("kij,kji->", a, b)))

    def norm(self, x, xi):
        return float(np.sqrt(max(self.inner(x, xi, xi), 0.0)))

    def project_with_multiplier(self, x, z):
        """Tangent projection together with its symmetric multiplier L."""
        x = self._as_parts(x, "point")
        z = self._as_parts(z, "ambient")
        return linalg.project_tangent(x, z, tol=self.tol_lin)

    def project(self, x, z):
        """Metric-orthogonal projection of an ambient tuple onto the tangent space.

        Each part is symmetrized first (the tangent space only sees
        symmetric parts), then corrected by X_i L X_i with the shared
        multiplier solving the coupled-conjugation system.
        """
        xi, _ = self.project_with_multiplier(x, z)
        return xi

    # -- retraction -------------------------------------------------------

    def retract(self, x, xi):
        """Map a tangent vector to a point: per-part exponential, then renormalize.

        Computes Y_i = X_i^{1/2} exp(X_i^{-1/2} xi_i X_i^{-1/2}) X_i^{1/2}
        (the congruence form keeps the exponent symmetric in floating
        point) and returns (Y_sum^{-1/2} Y_i Y_sum^{-1/2})_i. Raises
        Overflow when an exponent's spectral norm exceeds the cap, and
        NotPositiveDefinite if the normalization factorization fails.
        """
        x = self._as_parts(x, "point")
        xi = self._as_parts(xi, "tangent")
        root, invroot = linalg.spd_sqrt_invsqrt(x, self.eps_pd)
        w = linalg.symm(invroot @ xi @ invroot)
        evals, evecs = np.linalg.eigh(w)
        top = float(np.abs(evals).max())
        if top > self.exp_norm_cap:
            raise Overflow(
                f"retraction step too large: exponent spectral norm {top:.3e} "
                f"exceeds cap {self.exp_norm_cap:.1f}"
            )
        e = (evecs * np.exp(evals)[..., None, :]) @ linalg.adjoint(evecs)
        y = root @ e @ root
        ysum = linalg.symm(y.sum(axis=0))
        try:
            _, sinv = linalg.spd_sqrt_invsqrt(ysum, self.eps_pd)
        except NotPositiveDefinite as err:
            raise NotPositiveDefinite(
                f"retraction normalization failed: {err}"
            ) from err
        return linalg.symm(sinv @ y @ sinv)

    # -- gradient and Hessian conversion -----------------------------------

    def euclidean_to_ambient_gradient(self, x, egrad):
        """Per-part metric raising X_i symm(G_i) X_i, before projection."""
        x = self._as_parts(x, "point")
        egrad = self._as_parts(egrad, "euclidean gradient")
        return x @ linalg.symm(egrad) @ x

    def rgrad_with_multiplier(self, x, egrad):
        """Riemannian gradient and the multiplier of its projection."""
        return self.project_with_multiplier(
            x, self.euclidean_to_ambient_gradient(x, egrad))

    def egrad_to_rgrad(self, x, egrad):
        """Riemannian gradient from the Euclidean partial derivatives."""
        grad, _ = self.rgrad_with_multiplier(x, egrad)
        return grad

    def ehess_to_rhess(self, x, egrad, ehess_xi, xi):
        """Riemannian Hessian applied to xi.

        Takes the Euclidean gradient G, the Euclidean Hessian-vector
        product along xi, and tangent xi. Differentiates the ambient
        gradient field and applies the product-connection correction:

            D_i = xi_i S_i X_i + X_i symm(H_i) X_i + X_i S_i xi_i
                  + xi_i L X_i + X_i L xi_i,       S_i = symm(G_i),
            C_i = symm(xi_i X_i^{-1} grad_i),

        returning P_x(D - C). The multiplier's own derivative is dropped:
        its contribution is a pure conjugation tuple (X_i Ldot X_i)_i,
        which projects to zero.
        """
        x = self._as_parts(x, "point")
        xi = self._as_parts(xi, "tangent")
        gs = linalg.symm(self._as_parts(egrad, "euclidean gradient"))
        hs = linalg.symm(self._as_parts(ehess_xi, "euclidean hessian product"))
        grad, lam = self.rgrad_with_multiplier(x, gs)
        d = xi @ gs @ x + x @ hs @ x + x @ gs @ xi + xi @ lam @ x + x @ lam @ xi
        c = linalg.symm(xi @ np.linalg.solve(x, grad))
        return self.project(x, d - c)

    # -- random elements ----------------------------------------------------

    def _rng(self, rng):
        return np.random.default_rng(self.rng_seed) if rng is None else rng

    def _randn_parts(self, rng):
        b = rng.standard_normal((self.K, self.n, self.n))
        if self.field == "complex":
            b = b + 1j * rng.standard_normal((self.K, self.n, self.n))
        return b

    def random_point(self, rng=None):
        """Draw a valid point: normalize K random Gram matrices by their sum.

        A_i = B_i B_i^H + 0.1 I with B_i standard normal; the returned
        parts are S^{-1/2} A_i S^{-1/2} with S the sum of the A_i, which
        satisfies the constraint by construction. Deterministic for a
        given generator or seed.
        """
        rng = self._rng(rng)
        b = self._randn_parts(rng)
        a = b @ linalg.adjoint(b) + 0.1 * np.eye(self.n)
        _, sinv = linalg.spd_sqrt_invsqrt(linalg.symm(a.sum(axis=0)), self.eps_pd)
        return linalg.symm(sinv @ a @ sinv)

    def random_tangent(self, x, rng=None):
        """Draw a unit-norm tangent vector at x by projecting Gaussian parts."""
        x = self._as_parts(x, "point")
        rng = self._rng(rng)
        while True:
            xi = self.project(x, linalg.symm(self._randn_parts(rng)))
            nrm = self.norm(x, xi)
            if nrm > 0.0:
                return xi / nrm
