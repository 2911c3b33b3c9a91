"""Benchmark cost functions on the matrix simplex.

Each problem exposes the Euclidean pieces a solver needs: cost(x),
egrad(x) (per-part partial derivatives, shape (K, n, n)), and
ehess(x, xi) (directional derivative of egrad along xi). Conversion to
Riemannian gradients and Hessians happens in the manifold, not here.
"""

import numpy as np

from . import linalg
from .errors import BoundaryHit, InvalidInput

PROB_FLOOR = 1e-300


class Problem:
    """Shared shape bookkeeping for costs defined on (K, n, n) points."""

    name = "problem"
    n = None
    K = None
    field = "real"

    def _check(self, x):
        x = np.asarray(x)
        if x.shape != (self.K, self.n, self.n):
            raise InvalidInput(
                f"{self.name}: expected point of shape {(self.K, self.n, self.n)}, "
                f"got {x.shape}"
            )
        return x

    def cost(self, x):
        raise NotImplementedError

    def egrad(self, x):
        raise NotImplementedError

    def ehess(self, x, xi):
        raise NotImplementedError


class NearestPoint(Problem):
    """Squared Frobenius distance to a fixed tuple: f = 1/2 sum_i ||X_i - A_i||^2.

    Targets are symmetrized on ingest; the skew parts of the targets can
    never be matched by symmetric X_i and would only offset the cost.
    """

    name = "nearest_point"

    def __init__(self, targets):
        targets = np.asarray(targets)
        if targets.ndim != 3 or targets.shape[-1] != targets.shape[-2]:
            raise InvalidInput(
                f"nearest_point: targets must be (K, n, n), got {targets.shape}"
            )
        self.targets = linalg.symm(targets)
        self.K, self.n, _ = targets.shape
        self.field = "complex" if np.iscomplexobj(targets) else "real"

    def cost(self, x):
        d = self._check(x) - self.targets
        return 0.5 * float(np.real(np.sum(np.conj(d) * d)))

    def egrad(self, x):
        return self._check(x) - self.targets

    def ehess(self, x, xi):
        self._check(x)
        return np.asarray(xi)


class WeightedLogDet(Problem):
    """Weighted log-determinant barrier: f = -sum_i w_i logdet(X_i).

    Strictly convex on the feasible hull with the unique stationary point
    X_i* = (w_i / sum_j w_j) I, from the Lagrange condition
    -w_i X_i^{-1} + L = 0 combined with the sum constraint.
    """

    name = "weighted_logdet"

    def __init__(self, weights, n, field="real"):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or weights.size < 2:
            raise InvalidInput("weighted_logdet: need a vector of K >= 2 weights")
        if np.any(weights <= 0):
            raise InvalidInput("weighted_logdet: weights must be strictly positive")
        self.weights = weights
        self.K = weights.size
        self.n = int(n)
        self.field = field

    def cost(self, x):
        x = self._check(x)
        _, logdets = np.linalg.slogdet(x)
        return -float(np.dot(self.weights, np.real(logdets)))

    def egrad(self, x):
        x = self._check(x)
        inv = np.linalg.inv(x)
        return -self.weights[:, None, None] * linalg.symm(inv)

    def ehess(self, x, xi):
        x = self._check(x)
        inv_xi = np.linalg.solve(x, np.asarray(xi))
        return self.weights[:, None, None] * linalg.symm(
            inv_xi @ np.linalg.inv(x))

    def analytic_optimum(self):
        """The unique stationary point (w_i / sum w) I, valid for any n."""
        scale = self.weights / self.weights.sum()
        eye = np.eye(self.n, dtype=np.complex128 if self.field == "complex"
                     else np.float64)
        return scale[:, None, None] * eye


class PovmMle(Problem):
    """Maximum-likelihood fit of a measurement to observed outcome counts.

    Given probe density matrices rho_j (Hermitian, PSD, unit trace) and a
    J x K table of outcome counts c, minimizes the negative log-likelihood

        f(X) = -sum_{j,i} c_{ji} log trace(rho_j X_i)

    over measurement effects X_i on the Hermitian manifold. Outcome
    probabilities are clamped below at 1e-300 so orthogonal probe/effect
    pairs degrade the cost gracefully instead of overflowing.
    """

    name = "povm_mle"
    field = "complex"

    def __init__(self, states, counts):
        states = np.asarray(states, dtype=np.complex128)
        counts = np.asarray(counts, dtype=float)
        if states.ndim != 3 or states.shape[-1] != states.shape[-2]:
            raise InvalidInput(f"povm_mle: states must be (J, n, n), got {states.shape}")
        if counts.ndim != 2 or counts.shape[0] != states.shape[0]:
            raise InvalidInput(
                f"povm_mle: counts must be (J, K) with J={states.shape[0]}, "
                f"got {counts.shape}"
            )
        if np.any(counts < 0):
            raise InvalidInput("povm_mle: counts must be nonnegative")
        defect = linalg.symmetry_defect(states).max()
        if defect > 1e-10:
            raise InvalidInput(f"povm_mle: states not Hermitian (defect {defect:.3e})")
        eigs = np.linalg.eigvalsh(states)
        if eigs.min() < -1e-10:
            raise InvalidInput(
                f"povm_mle: states not PSD (eigenvalue {eigs.min():.3e})")
        traces = np.real(np.trace(states, axis1=-2, axis2=-1))
        if np.abs(traces - 1.0).max() > 1e-10:
            raise InvalidInput("povm_mle: states must have unit trace")
        self.states = states
        self.counts = counts
        self.J, self.n, _ = states.shape
        self.K = counts.shape[1]

    def _probs(self, x):
        # p_{ji} = trace(rho_j X_i), real for Hermitian operands
        p = np.real(np.einsum("jab,iba->ji", self.states, self._check(x)))
        return np.maximum(p, PROB_FLOOR)

    def cost(self, x):
        return -float(np.sum(self.counts * np.log(self._probs(x))))

    def egrad(self, x):
        w = self.counts / self._probs(x)  # (J, K)
        return -np.einsum("ji,jab->iab", w, self.states)

    def ehess(self, x, xi):
        p = self._probs(x)
        dp = np.real(np.einsum("jab,iba->ji", self.states, np.asarray(xi)))
        w = self.counts * dp / p ** 2
        return np.einsum("ji,jab->iab", w, self.states)


def project_to_simplex(v):
    """Euclidean projection of a vector onto the probability simplex.

    Sort-and-threshold: with u the descending sort of v, find the largest
    j such that u_j + (1 - sum_{i<=j} u_i)/j > 0 and shift by that pivot.
    """
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    cumsum = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = np.nonzero(u + (1.0 - cumsum) / j > 0)[0][-1]
    theta = (1.0 - cumsum[rho]) / (rho + 1.0)
    return np.maximum(v + theta, 0.0)


def nearest_point_diagonal_oracle(targets, eps_pd=linalg.DEFAULT_EPS_PD):
    """Exact minimizer of the nearest-point cost for jointly diagonal targets.

    The cost decouples across diagonal slots into K-dimensional scalar
    simplex projections; the diagonal solution is the manifold optimum
    because the cost is convex on the convex hull of the constraint set
    and inherits the targets' diagonal symmetry. Raises BoundaryHit when
    a slot's projection touches the boundary (instance rejected),
    InvalidInput when the targets are not diagonal.
    """
    targets = np.asarray(targets)
    k, n, _ = targets.shape
    offdiag = targets - np.eye(n) * np.diagonal(targets, axis1=-2, axis2=-1)[:, None, :]
    if np.abs(offdiag).max() > 0:
        raise InvalidInput("diagonal oracle: targets must be exactly diagonal")
    diags = np.real(np.diagonal(targets, axis1=-2, axis2=-1))  # (K, n)
    out = np.zeros((k, n))
    for d in range(n):
        slot = project_to_simplex(diags[:, d])
        if slot.min() <= eps_pd:
            raise BoundaryHit(
                f"diagonal oracle: slot {d} projects onto the simplex boundary")
        out[:, d] = slot
    result = np.zeros_like(targets, dtype=float)
    for d in range(n):
        result[:, d, d] = out[:, d]
    return result
