"""Dense symmetric/Hermitian matrix kernels.

Everything operates on numpy arrays, batched over leading axes where it
makes sense: a K-tuple of n x n matrices is an array of shape (K, n, n).
Real symmetric and complex Hermitian inputs go through the same code
paths; "symmetric" below always means symmetric-or-Hermitian.
"""

import numba
import numpy as np

from .errors import IllConditioned, InvalidInput, NotPositiveDefinite

DEFAULT_EPS_PD = 1e-12
DEFAULT_TOL_LIN = 1e-10
SYMMETRY_TOL = 1e-12


def adjoint(a):
    """Transpose (real) or conjugate transpose (complex) of the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def symm(a):
    """Symmetric/Hermitian part (A + A^H)/2. Idempotent."""
    return 0.5 * (np.asarray(a) + adjoint(a))


def symmetry_defect(a):
    """Relative asymmetry ||A - A^H||_F / max(1, ||A||_F), per batch entry."""
    a = np.asarray(a)
    num = np.linalg.norm(a - adjoint(a), axis=(-2, -1))
    den = np.maximum(1.0, np.linalg.norm(a, axis=(-2, -1)))
    return num / den


def frob_inner(a, b):
    """Real Frobenius inner product Re<A, B> = Re sum(conj(A) * B)."""
    return float(np.real(np.sum(np.conj(a) * b)))


def frob_norm(a):
    return float(np.linalg.norm(np.asarray(a).ravel()))


def expm_sym(s):
    """Matrix exponential of a symmetric/Hermitian matrix via eigendecomposition.

    Batched over leading axes. The result is symmetrized to remove
    round-off skew, and is positive definite for any finite input.
    """
    s = np.asarray(s)
    if not np.all(np.isfinite(s)):
        raise InvalidInput("matrix exponential of non-finite input")
    w, v = np.linalg.eigh(s)
    return symm((v * np.exp(w)[..., None, :]) @ adjoint(v))


def spd_sqrt_invsqrt(p, eps_pd=DEFAULT_EPS_PD):
    """Square root and inverse square root of an SPD/HPD matrix.

    Returns (P^{1/2}, P^{-1/2}) from one eigendecomposition; batched over
    leading axes. Raises NotPositiveDefinite if any eigenvalue is below
    eps_pd.
    """
    p = np.asarray(p)
    w, v = np.linalg.eigh(p)
    wmin = w.min()
    if wmin < eps_pd:
        raise NotPositiveDefinite(
            f"matrix square root: smallest eigenvalue {wmin:.3e} < {eps_pd:.1e}",
            min_eigenvalue=float(wmin),
        )
    sqrt_w = np.sqrt(w)
    root = symm((v * sqrt_w[..., None, :]) @ adjoint(v))
    invroot = symm((v / sqrt_w[..., None, :]) @ adjoint(v))
    return root, invroot


def conjugation_sum(xs, lam):
    """Apply the coupled-conjugation operator: sum_i X_i L X_i."""
    return np.sum(xs @ lam @ xs, axis=0)


@numba.njit(cache=True)
def _frob_inner_jit(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            acc += (np.conj(a[i, j]) * b[i, j]).real
    return acc


@numba.njit(cache=True)
def _conjugation_sum_jit(xs, p, out):
    out[:] = 0
    for k in range(xs.shape[0]):
        out += xs[k] @ (p @ xs[k])


@numba.njit(cache=True)
def _cg_core(xs, rhs, target, maxiter):
    """CG on the symmetric matrices; returns (L, status).

    status: 0 converged (true residual below target), 1 iteration cap
    exhausted, 2 operator numerically not positive definite. Compiled,
    with the vector updates fused into single passes, so an iteration
    costs the 2K small matrix products plus three n^2 sweeps.
    """
    n = rhs.shape[0]
    lam = np.zeros_like(rhs)
    r = rhs.copy()
    p = r.copy()
    ap = np.zeros_like(rhs)
    rs = _frob_inner_jit(r, r)
    for _ in range(maxiter):
        _conjugation_sum_jit(xs, p, ap)
        denom = 0.0
        for i in range(n):
            for j in range(n):
                denom += (np.conj(p[i, j]) * ap[i, j]).real
        if denom <= 0.0:
            return lam, 2
        alpha = rs / denom
        rs_new = 0.0
        for i in range(n):
            for j in range(n):
                lam[i, j] += alpha * p[i, j]
                r[i, j] -= alpha * ap[i, j]
                rs_new += (np.conj(r[i, j]) * r[i, j]).real
        if np.sqrt(rs_new) <= target:
            # confirm with the true residual; restart from it on drift
            _conjugation_sum_jit(xs, lam, ap)
            true_r = rhs - ap
            rs_true = _frob_inner_jit(true_r, true_r)
            if np.sqrt(rs_true) <= target:
                return lam, 0
            r = true_r
            p = r.copy()
            rs = rs_true
            continue
        beta = rs_new / rs
        for i in range(n):
            for j in range(n):
                p[i, j] = r[i, j] + beta * p[i, j]
        rs = rs_new
    return lam, 1


def solve_sum_conjugation(xs, rhs, tol=DEFAULT_TOL_LIN, maxiter=None):
    """Solve sum_i X_i L X_i = RHS for symmetric/Hermitian L.

    The operator is self-adjoint and positive definite on the symmetric
    matrices under the Frobenius inner product, so plain conjugate
    gradients applies; each operator application costs O(K n^3). On
    convergence of the recurrence residual the true residual is
    recomputed, and CG restarts from it if they disagree, so the returned
    L always satisfies ||sum_i X_i L X_i - RHS||_F <= tol * ||RHS||_F.

    Raises IllConditioned if the cap is exhausted first (near-singular X_i).
    """
    xs = np.asarray(xs)
    rhs = np.asarray(rhs)
    if xs.ndim != 3 or xs.shape[-1] != xs.shape[-2] or rhs.shape != xs.shape[1:]:
        raise InvalidInput(
            f"coupled-conjugation solve: expected (K, n, n) and (n, n), "
            f"got {xs.shape} and {rhs.shape}"
        )
    n = rhs.shape[0]
    rhs_norm = frob_norm(rhs)
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)
    if maxiter is None:
        maxiter = 10 * n * (n + 1) + 50

    dtype = np.result_type(xs.dtype, rhs.dtype, float)
    lam, status = _cg_core(np.ascontiguousarray(xs, dtype=dtype),
                           np.ascontiguousarray(rhs, dtype=dtype),
                           tol * rhs_norm, maxiter)
    if status == 2:
        raise IllConditioned(
            "coupled-conjugation solve: operator lost positive definiteness "
            "(near-singular parts)"
        )
    if status == 1:
        raise IllConditioned(
            f"coupled-conjugation solve: no convergence to {tol:.1e} relative "
            f"residual in {maxiter} iterations"
        )
    return symm(lam)


@numba.njit(cache=True)
def _project_core(xs, z, tol, maxiter):
    """Fused tangent projection: symmetrize, solve for L, combine.

    Returns (projected parts, L, status) with the status codes of
    _cg_core. Fused so the whole projection costs the K-linear matrix
    products plus a handful of n^2 passes.
    """
    kparts, n, _ = xs.shape
    zs = np.empty_like(z)
    rhs = np.zeros((n, n), dtype=z.dtype)
    for k in range(kparts):
        zs[k] = 0.5 * (z[k] + np.conj(z[k].T))
        rhs -= zs[k]
    lam = np.zeros((n, n), dtype=z.dtype)
    status = 0
    rhs_norm = np.sqrt(_frob_inner_jit(rhs, rhs))
    if rhs_norm > 0.0:
        lam, status = _cg_core(xs, rhs, tol * rhs_norm, maxiter)
        lam = 0.5 * (lam + np.conj(lam.T))
    out = np.empty_like(zs)
    for k in range(kparts):
        out[k] = zs[k] + xs[k] @ (lam @ xs[k])
    return out, lam, status


def project_tangent(xs, z, tol=DEFAULT_TOL_LIN, maxiter=None):
    """Project ambient parts z onto the tangent space at the point xs.

    Symmetrizes each part, solves the coupled-conjugation system for the
    shared multiplier L with right-hand side -sum_i symm(Z_i), and
    returns (symm(Z_i) + X_i L X_i, L). Raises IllConditioned like
    solve_sum_conjugation.
    """
    xs = np.asarray(xs)
    z = np.asarray(z)
    if xs.shape != z.shape or xs.ndim != 3:
        raise InvalidInput(
            f"tangent projection: point and ambient shapes differ: "
            f"{xs.shape} vs {z.shape}"
        )
    n = xs.shape[-1]
    if maxiter is None:
        maxiter = 10 * n * (n + 1) + 50
    dtype = np.result_type(xs.dtype, z.dtype, float)
    out, lam, status = _project_core(
        np.ascontiguousarray(xs, dtype=dtype),
        np.ascontiguousarray(z, dtype=dtype), tol, maxiter)
    if status == 2:
        raise IllConditioned(
            "tangent projection: conjugation operator lost positive "
            "definiteness (near-singular parts)"
        )
    if status == 1:
        raise IllConditioned(
            f"tangent projection: multiplier solve did not reach {tol:.1e} "
            f"relative residual in {maxiter} iterations"
        )
    return out, lam


def solve_sum_conjugation_dense(xs, rhs):
    """Direct dense solve of sum_i X_i L X_i = RHS by Kronecker vectorization.

    Builds the n^2 x n^2 matrix sum_i X_i^T kron X_i (column-stacking
    convention) and solves it directly. Debug oracle for small n; cost
    grows as n^6.
    """
    xs = np.asarray(xs)
    rhs = np.asarray(rhs)
    if xs.ndim != 3 or rhs.shape != xs.shape[1:]:
        raise InvalidInput(
            f"dense conjugation solve: expected (K, n, n) and (n, n), "
            f"got {xs.shape} and {rhs.shape}"
        )
    n = rhs.shape[0]
    op = np.zeros((n * n, n * n), dtype=xs.dtype)
    for i in range(xs.shape[0]):
        op += np.kron(xs[i].T, xs[i])
    vec = np.linalg.solve(op, rhs.reshape(n * n, order="F"))
    return symm(vec.reshape(n, n, order="F"))
