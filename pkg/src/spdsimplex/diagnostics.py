"""Numerical self-checks for the geometry and the cost interfaces.

These routines back the `check`, `gradcheck`, and `bench` commands and
the acceptance tests: projection/retraction invariants over random
instances, finite-difference Taylor slopes for gradients and Hessians,
a tangent-space rank estimate, and wall-clock scaling of the core
operations. Each check returns its measured residual so callers can
print a report and compare against the stated tolerance.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import linalg
from .manifold import MatrixSimplex

# tolerances of the geometry invariants, fixed by the acceptance criteria
TOL_PROJECTION = 1e-9
TOL_TANGENCY = 1e-9
TOL_ORTHOGONALITY = 1e-9
TOL_CENTERING = 1e-12
RIGIDITY_RATIO = 0.6
# ignore Taylor residuals below the floating-point floor of the cost
RESIDUAL_FLOOR = 1e-13


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return self.residual <= self.tolerance

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{self.name:<26s} {self.residual:12.3e}  (tol {self.tolerance:8.1e})  {flag}"


def pairing(man, x, a, b):
    """Metric-style pairing extended to arbitrary symmetric tuples at x."""
    sa = np.linalg.solve(x, a)
    sb = np.linalg.solve(x, b)
    return float(np.real(np.einsum("kij,kji->", sa, sb)))


def run_geometry_checks(man, trials=20, rng=None):
    """Max residuals of the manifold invariants over random instances.

    Covers projection idempotence, tangency, metric orthogonality of the
    projection residual, retraction centering and rigidity, metric
    positivity, and the tangent-space dimension estimate. Returns a list
    of CheckResult in reporting order (first failure is the headline).
    """
    rng = np.random.default_rng(man.rng_seed) if rng is None else rng
    idem = tang = orth = cent = pos = 0.0
    rig = 0.0
    for _ in range(trials):
        x = man.random_point(rng)
        z = man._randn_parts(rng)
        z /= linalg.frob_norm(z)
        eta = man.random_tangent(x, rng)

        xi = man.project(x, z)
        xi2 = man.project(x, xi)
        scale = 1.0 + linalg.frob_norm(z)
        idem = max(idem, linalg.frob_norm(xi2 - xi) / scale)
        tang = max(tang, linalg.frob_norm(xi.sum(axis=0))
                   / max(1.0, linalg.frob_norm(z)))
        residual = linalg.symm(z) - xi
        denom = (1.0 + linalg.frob_norm(residual)) * man.norm(x, eta)
        orth = max(orth, abs(pairing(man, x, residual, eta)) / denom)

        cent = max(cent, linalg.frob_norm(
            man.retract(x, np.zeros_like(x)) - x))
        nrm = man.norm(x, eta)
        pos = max(pos, abs(nrm - 1.0))  # random_tangent normalizes to 1

        ratios = rigidity_ratios(man, x, eta)
        rig = max(rig, max(ratios))

    dim_est = estimate_tangent_dimension(man, rng)
    return [
        CheckResult("projection_idempotence", idem, TOL_PROJECTION),
        CheckResult("tangency", tang, TOL_TANGENCY),
        CheckResult("metric_orthogonality", orth, TOL_ORTHOGONALITY),
        CheckResult("retraction_centering", cent, TOL_CENTERING),
        CheckResult("retraction_rigidity", rig, RIGIDITY_RATIO),
        CheckResult("metric_positivity", pos, 1e-10),
        CheckResult("dimension_estimate", abs(dim_est - man.dim), 0.5),
    ]


def rigidity_errors(man, x, xi, t_max=1e-1, t_min=1e-5):
    """Finite-difference rigidity errors e(t) = ||(R(t xi) - x)/t - xi||_F.

    t runs from t_max down to t_min by halving; first-order agreement of
    the retraction with the identity makes e(t) shrink linearly in t.
    """
    ts, errs = [], []
    t = t_max
    while t >= t_min:
        errs.append(linalg.frob_norm((man.retract(x, t * xi) - x) / t - xi))
        ts.append(t)
        t *= 0.5
    return np.array(ts), np.array(errs)


def rigidity_ratios(man, x, xi, t_max=1e-1, t_min=1e-5):
    """Consecutive-halving ratios e(t/2)/e(t); all should be <= 0.6."""
    _, errs = rigidity_errors(man, x, xi, t_max, t_min)
    return errs[1:] / errs[:-1]


def loglog_slope(ts, residuals, floor):
    """Least-squares slope of log residual vs log t, above the noise floor.

    Residuals below `floor` sit on the round-off plateau of the cost
    evaluation and would bias the slope; they are excluded from the fit.
    """
    ts = np.asarray(ts)
    residuals = np.asarray(residuals)
    keep = residuals > floor
    if keep.sum() < 3:
        return np.nan
    return float(np.polyfit(np.log10(ts[keep]), np.log10(residuals[keep]), 1)[0])


def first_order_slope(man, problem, x, xi, t_lo=1e-6, t_hi=1e-1, samples=13):
    """Slope of the first-order Taylor residual along the retraction curve.

    r(t) = |f(R(t xi)) - f(x) - t g_x(grad, xi)| should scale as t^2; a
    correct gradient yields slope ~2, a wrong one degrades toward 1.
    """
    f0 = problem.cost(x)
    grad = man.egrad_to_rgrad(x, problem.egrad(x))
    df0 = man.inner(x, grad, xi)
    ts = np.logspace(np.log10(t_lo), np.log10(t_hi), samples)
    res = np.array([abs(problem.cost(man.retract(x, t * xi)) - f0 - t * df0)
                    for t in ts])
    return loglog_slope(ts, res, RESIDUAL_FLOOR * max(1.0, abs(f0)))


def second_order_slope(man, problem, xstar, xi, t_lo=1e-6, t_hi=1e-1,
                       samples=13):
    """Slope of the second-order Taylor residual at a critical point.

    At grad = 0, r(t) = |f(R(t xi)) - f(x*) - t^2/2 g(Hess[xi], xi)|
    scales as t^3 independent of the retraction's higher-order terms.
    """
    f0 = problem.cost(xstar)
    egrad = problem.egrad(xstar)
    hxi = man.ehess_to_rhess(xstar, egrad, problem.ehess(xstar, xi), xi)
    quad = 0.5 * man.inner(xstar, hxi, xi)
    ts = np.logspace(np.log10(t_lo), np.log10(t_hi), samples)
    res = np.array([abs(problem.cost(man.retract(xstar, t * xi)) - f0
                        - t * t * quad) for t in ts])
    return loglog_slope(ts, res, RESIDUAL_FLOOR * max(1.0, abs(f0)))


def selfadjointness_residual(man, problem, x, rng):
    """|g(Hess[xi], eta) - g(xi, Hess[eta])| / (||xi|| ||eta||) at x."""
    xi = man.random_tangent(x, rng)
    eta = man.random_tangent(x, rng)
    egrad = problem.egrad(x)
    h_xi = man.ehess_to_rhess(x, egrad, problem.ehess(x, xi), xi)
    h_eta = man.ehess_to_rhess(x, egrad, problem.ehess(x, eta), eta)
    gap = abs(man.inner(x, h_xi, eta) - man.inner(x, xi, h_eta))
    return gap / (man.norm(x, xi) * man.norm(x, eta))


def estimate_tangent_dimension(man, rng, oversample=8):
    """Numerical rank of the span of projected random ambient tuples.

    Projects dim + oversample random tuples, flattens them to real
    coordinate vectors, and counts singular values above a relative
    threshold; equals the manifold dimension when projection and tangent
    space agree.
    """
    x = man.random_point(rng)
    count = man.dim + oversample
    rows = []
    for _ in range(count):
        xi = man.project(x, man._randn_parts(rng))
        flat = xi.ravel()
        rows.append(np.concatenate([flat.real, flat.imag])
                    if man.field == "complex" else flat.real)
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(np.sum(s > s[0] * 1e-8))


def gradcheck_report(man, problem, rng, optimum=None):
    """First/second-order slopes and the self-adjointness residual.

    The second-order slope needs a critical point; it is skipped (NaN)
    unless `optimum` is supplied.
    """
    x = man.random_point(rng)
    xi = man.random_tangent(x, rng)
    report = {
        "first_order_slope": first_order_slope(man, problem, x, xi),
        "selfadjointness": selfadjointness_residual(man, problem, x, rng),
        "second_order_slope": np.nan,
    }
    if optimum is not None:
        xstar = man.validate_point(optimum)
        report["second_order_slope"] = second_order_slope(
            man, problem, xstar, man.random_tangent(xstar, rng))
    return report


def bench_point(n, k, rng, spread=0.7):
    """Benchmark point whose multiplier solve has K-independent conditioning.

    Random points concentrate as K grows, which changes the CG iteration
    count and would confound a scaling measurement. This family pins the
    conjugation operator's spectrum instead: with balanced signs w_i
    (sum zero), profiles sigma_a in [-1, 1], and a shared orthogonal Q,

        X_i = Q diag((1 + spread * sigma_a * w_i) / K) Q^T

    sums to the identity exactly, and the conjugation operator's spectrum
    is {(1 + spread^2 sigma_a sigma_b) / K}: the same relative spread,
    hence the same CG iteration count, for every K.
    """
    w = np.empty(k)
    w[0::2] = 1.0
    w[1::2] = -1.0
    if k % 2:
        w[-1] = 0.0
    sigma = np.linspace(-1.0, 1.0, n)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    diags = (1.0 + spread * np.outer(w, sigma)) / k  # (K, n)
    return linalg.symm(np.einsum("ab,kb,cb->kac", q, diags, q))


def bench_geometry_ops(n_list, k_list, seed=0, repeats=9, calls=6):
    """Wall time of project/retract/hessian over an (n, K) grid.

    Returns rows (op, n, K, mean_ms): per-call time of the fastest of
    `repeats` batches of `calls` invocations each, after one warm-up call
    per op. The fastest batch is the standard low-noise estimator for
    microbenchmarks of this size.
    """
    rows = []
    for n in n_list:
        for k in k_list:
            man = MatrixSimplex(n, k)
            rng = np.random.default_rng(seed)
            x = bench_point(n, k, rng)
            z = man._randn_parts(rng)
            xi = man.random_tangent(x, rng)
            egrad = linalg.symm(man._randn_parts(rng))
            hxi = linalg.symm(man._randn_parts(rng))
            ops = {
                "project": lambda: man.project(x, z),
                "retract": lambda: man.retract(x, 0.1 * xi),
                "ehess_to_rhess": lambda: man.ehess_to_rhess(x, egrad, hxi, xi),
            }
            for name, fn in ops.items():
                fn()  # warm-up
                samples = []
                for _ in range(repeats):
                    t0 = time.perf_counter()
                    for _ in range(calls):
                        fn()
                    samples.append((time.perf_counter() - t0) / calls)
                rows.append((name, n, k, 1e3 * float(np.min(samples))))
    return rows
