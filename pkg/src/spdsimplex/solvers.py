"""Riemannian solvers on the matrix simplex.

Three methods built purely from the manifold API: steepest descent with
Armijo backtracking, Polak-Ribiere+ conjugate gradients with projection
transport, and a trust-region method with a truncated-CG subproblem
solver driven by Hessian-vector products. See Absil, Mahony & Sepulchre,
"Optimization Algorithms on Matrix Manifolds" (2008) for the template
algorithms; every constant is configurable through SolverConfig.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, LineSearchFail, NotPositiveDefinite, Overflow

STATUS_CONVERGED = "Converged"
STATUS_MAXITER = "MaxIter"
STATUS_LINESEARCH_FAIL = "LineSearchFail"
STATUS_BOUNDARY = "Boundary"

# relative noise floor used to regularize trust-region acceptance ratios
RHO_REGULARIZATION = 1e4 * np.finfo(float).eps


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters for all three methods; unused fields are ignored."""

    method: str = "rsd"                 # rsd | rcg | rtr
    max_iter: int = 1000
    tol_gradnorm: float = 1e-6
    # backtracking line search (rsd, rcg)
    initial_step: float | None = None   # None: 1/(1 + gradnorm) on iteration 0
    contraction: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 50
    # trust region (rtr)
    initial_radius: float = 1.0
    max_radius: float = 100.0
    eta_accept: float = 0.1
    tcg_max_inner: int | None = None    # None: manifold dimension
    tcg_kappa: float = 0.1
    tcg_theta: float = 1.0

    def __post_init__(self):
        if self.method not in ("rsd", "rcg", "rtr"):
            raise InvalidInput(f"unknown method {self.method!r}")
        if self.max_iter < 0 or self.tol_gradnorm <= 0:
            raise InvalidInput("max_iter must be >= 0 and tol_gradnorm > 0")
        if not 0.0 < self.contraction < 1.0:
            raise InvalidInput("contraction must lie in (0, 1)")
        if self.sufficient_decrease <= 0 or self.max_backtracks <= 0:
            raise InvalidInput("line-search constants must be positive")
        if self.initial_radius <= 0 or self.max_radius <= 0:
            raise InvalidInput("trust-region radii must be positive")
        if not 0.0 < self.eta_accept <= 0.25:
            raise InvalidInput("eta_accept must lie in (0, 0.25]")
        if self.tcg_kappa <= 0 or self.tcg_theta <= 0:
            raise InvalidInput("tCG stopping constants must be positive")


@dataclass
class IterateRecord:
    iter: int
    cost: float
    gradnorm: float
    step: float             # accepted step length (rsd/rcg) or radius (rtr)
    inner_iters: int        # backtracks (rsd/rcg) or tCG iterations (rtr)
    wall_ms: float
    near_boundary: bool = False


@dataclass
class IterateTrace:
    records: list = field(default_factory=list)
    status: str = STATUS_MAXITER
    message: str = ""

    @property
    def final_cost(self):
        return self.records[-1].cost if self.records else np.nan

    @property
    def final_gradnorm(self):
        return self.records[-1].gradnorm if self.records else np.nan

    def __len__(self):
        return len(self.records)


def armijo_linesearch(man, problem, x, direction, f0, df0, t0,
                      contraction=0.5, sufficient_decrease=1e-4,
                      max_backtracks=50):
    """Backtrack along t -> retract(x, t * direction) until sufficient decrease.

    Requires df0 = g_x(grad, direction) < 0. Returns (t, x_new, f_new,
    backtracks) for the largest tested t = t0 * contraction^k satisfying
    f(retract) <= f0 + sufficient_decrease * t * df0. Retraction overflow
    (or a failed normalization) during probing counts as a failed probe.
    Raises LineSearchFail when max_backtracks probes are exhausted.
    """
    if df0 >= 0:
        raise InvalidInput(
            f"line search needs a descent direction, got slope {df0:.3e}")
    t = float(t0)
    for k in range(max_backtracks):
        try:
            x_new = man.retract(x, t * direction)
            f_new = problem.cost(x_new)
        except (Overflow, NotPositiveDefinite):
            t *= contraction
            continue
        if f_new <= f0 + sufficient_decrease * t * df0:
            return t, x_new, f_new, k
        t *= contraction
    raise LineSearchFail(
        f"no sufficient decrease in {max_backtracks} backtracks "
        f"(slope {df0:.3e}, last step {t:.3e})")


def _fail_status(man, x):
    return STATUS_BOUNDARY if man.is_near_boundary(x) else STATUS_LINESEARCH_FAIL


def _ensure_feasible(man, x):
    # repair constraint drift before it accumulates past tol_feas
    if man.feasibility_defect(x) > man.tol_feas:
        return man.renormalize(x)
    return x


def _descent_loop(man, problem, x0, cfg, use_cg):
    """Shared RSD/RCG iteration; use_cg switches the direction update."""
    x = man.validate_point(x0)
    f = problem.cost(x)
    trace = IterateTrace()
    clock = time.perf_counter()

    prev = None  # (grad, direction, step, slope, gradnorm^2) at prior iterate
    for it in range(cfg.max_iter + 1):
        egrad = problem.egrad(x)
        grad = man.egrad_to_rgrad(x, egrad)
        gradnorm = man.norm(x, grad)
        near = man.is_near_boundary(x)

        if gradnorm <= cfg.tol_gradnorm or it == cfg.max_iter:
            trace.records.append(IterateRecord(
                it, f, gradnorm, 0.0, 0,
                (time.perf_counter() - clock) * 1e3, near))
            trace.status = (STATUS_CONVERGED if gradnorm <= cfg.tol_gradnorm
                            else STATUS_MAXITER)
            return x, trace

        direction = -grad
        if use_cg and prev is not None:
            old_grad, old_dir, _, _, old_gn_sq = prev
            # Polak-Ribiere+ with projection transport; Powell restart when
            # consecutive gradients lose conjugacy, and whenever the
            # combined direction is not a descent direction
            transported = man.project(x, old_grad)
            overlap = abs(man.inner(x, grad, transported))
            if overlap < 0.1 * gradnorm ** 2:
                beta = max(0.0, man.inner(x, grad, grad - transported) / old_gn_sq)
                direction = -grad + beta * man.project(x, old_dir)
                if man.inner(x, grad, direction) >= 0:
                    direction = -grad
        slope = man.inner(x, grad, direction)

        t0 = _initial_step(man, x, grad, gradnorm, slope, cfg, prev, use_cg)
        try:
            step_len, x_new, f_new, backtracks = armijo_linesearch(
                man, problem, x, direction, f, slope, t0,
                cfg.contraction, cfg.sufficient_decrease, cfg.max_backtracks)
        except LineSearchFail as err:
            trace.records.append(IterateRecord(
                it, f, gradnorm, 0.0, cfg.max_backtracks,
                (time.perf_counter() - clock) * 1e3, near))
            trace.status = _fail_status(man, x)
            trace.message = str(err)
            return x, trace

        trace.records.append(IterateRecord(
            it, f, gradnorm, step_len, backtracks,
            (time.perf_counter() - clock) * 1e3, near))
        prev = (grad, direction, step_len, slope, gradnorm ** 2)
        x = _ensure_feasible(man, x_new)
        f = f_new


def _initial_step(man, x, grad, gradnorm, slope, cfg, prev, use_cg):
    """Warm-started trial step: BB1 for descent, slope-rescaled for CG."""
    if cfg.initial_step is not None:
        return cfg.initial_step
    fallback = 1.0 / (1.0 + gradnorm)
    if prev is None:
        return fallback
    old_grad, old_dir, old_step, old_slope, _ = prev
    if use_cg:
        # keep the first-order decrease of the previous accepted step
        guess = old_step * old_slope / slope
    else:
        # Barzilai-Borwein 1: transported step and gradient difference
        s = man.project(x, old_step * old_dir)
        y = grad - man.project(x, old_grad)
        sy = man.inner(x, s, y)
        guess = man.inner(x, s, s) / sy if sy > 0 else 0.0
    if not np.isfinite(guess) or guess <= 0:
        return fallback
    return guess


def solve_rsd(man, problem, x0, cfg):
    """Riemannian steepest descent with Armijo backtracking."""
    return _descent_loop(man, problem, x0, cfg, use_cg=False)


def solve_rcg(man, problem, x0, cfg):
    """Riemannian Polak-Ribiere+ conjugate gradients, projection transport."""
    return _descent_loop(man, problem, x0, cfg, use_cg=True)


def truncated_cg(man, x, grad, hess, radius, max_inner, kappa, theta):
    """Steihaug-Toint truncated CG for the trust-region subproblem.

    Approximately minimizes m(eta) = <grad, eta> + 1/2 <hess(eta), eta>
    within the metric ball of the given radius. Stops on the usual three
    events: boundary crossing, nonpositive curvature (step to the
    boundary), or residual drop below ||r0|| * min(kappa, ||r0||^theta).
    With max_inner = 0 returns the explicit Cauchy point. Returns
    (eta, model_decrease, iterations, hit_boundary).
    """
    inner = lambda a, b: man.inner(x, a, b)
    eta = np.zeros_like(grad)
    h_eta = np.zeros_like(grad)
    r = grad.copy()
    d = -grad
    r_r = inner(r, r)
    norm_r0 = np.sqrt(r_r)
    stop_residual = norm_r0 * min(kappa, norm_r0 ** theta)

    if max_inner == 0:
        # Cauchy point: minimize along -grad inside the ball
        hg = hess(grad)
        curvature = inner(grad, hg)
        tau = radius / norm_r0
        if curvature > 0:
            tau = min(tau, r_r / curvature)
        eta = -tau * grad
        decrease = tau * r_r - 0.5 * tau ** 2 * curvature
        return eta, decrease, 0, bool(tau * norm_r0 >= radius - 1e-15)

    def to_boundary(eta, d, h_d):
        # positive root of ||eta + tau d||^2 = radius^2
        ee = inner(eta, eta)
        ed = inner(eta, d)
        dd = inner(d, d)
        tau = (-ed + np.sqrt(ed ** 2 + dd * (radius ** 2 - ee))) / dd
        return eta + tau * d, h_eta + tau * h_d

    for j in range(1, max_inner + 1):
        h_d = hess(d)
        curvature = inner(d, h_d)
        if curvature <= 0:
            eta, h_eta = to_boundary(eta, d, h_d)
            return eta, _model_decrease(inner, grad, eta, h_eta), j, True
        alpha = r_r / curvature
        eta_new = eta + alpha * d
        if np.sqrt(inner(eta_new, eta_new)) >= radius:
            eta, h_eta = to_boundary(eta, d, h_d)
            return eta, _model_decrease(inner, grad, eta, h_eta), j, True
        eta = eta_new
        h_eta = h_eta + alpha * h_d
        r = r + alpha * h_d
        r_r_new = inner(r, r)
        if np.sqrt(r_r_new) <= stop_residual:
            return eta, _model_decrease(inner, grad, eta, h_eta), j, False
        d = -r + (r_r_new / r_r) * d
        r_r = r_r_new
    return eta, _model_decrease(inner, grad, eta, h_eta), max_inner, False


def _model_decrease(inner, grad, eta, h_eta):
    return -(inner(grad, eta) + 0.5 * inner(eta, h_eta))


def solve_rtr(man, problem, x0, cfg):
    """Riemannian trust region with truncated-CG subproblem solves."""
    x = man.validate_point(x0)
    f = problem.cost(x)
    radius = cfg.initial_radius
    max_inner = cfg.tcg_max_inner if cfg.tcg_max_inner is not None else man.dim
    trace = IterateTrace()
    clock = time.perf_counter()

    for it in range(cfg.max_iter + 1):
        egrad = problem.egrad(x)
        grad = man.egrad_to_rgrad(x, egrad)
        gradnorm = man.norm(x, grad)
        near = man.is_near_boundary(x)
        if gradnorm <= cfg.tol_gradnorm or it == cfg.max_iter:
            trace.records.append(IterateRecord(
                it, f, gradnorm, radius, 0,
                (time.perf_counter() - clock) * 1e3, near))
            trace.status = (STATUS_CONVERGED if gradnorm <= cfg.tol_gradnorm
                            else STATUS_MAXITER)
            return x, trace

        hess = lambda v: man.ehess_to_rhess(x, egrad, problem.ehess(x, v), v)
        eta, decrease, inner_iters, hit_boundary = truncated_cg(
            man, x, grad, hess, radius, max_inner, cfg.tcg_kappa, cfg.tcg_theta)

        try:
            x_try = man.retract(x, eta)
            f_try = problem.cost(x_try)
        except (Overflow, NotPositiveDefinite):
            x_try, f_try = x, np.inf
        # regularized acceptance ratio, robust to round-off near convergence
        reg = RHO_REGULARIZATION * max(1.0, abs(f))
        rho = (f - f_try + reg) / (decrease + reg)

        if rho < 0.25:
            radius *= 0.25
        elif rho > 0.75 and hit_boundary:
            radius = min(2.0 * radius, cfg.max_radius)

        trace.records.append(IterateRecord(
            it, f, gradnorm, radius, inner_iters,
            (time.perf_counter() - clock) * 1e3, near))
        if rho > cfg.eta_accept and np.isfinite(f_try):
            x = _ensure_feasible(man, x_try)
            f = f_try


_METHODS = {"rsd": solve_rsd, "rcg": solve_rcg, "rtr": solve_rtr}


def solve(man, problem, x0, cfg):
    """Dispatch on cfg.method; returns (final_point, IterateTrace)."""
    return _METHODS[cfg.method](man, problem, x0, cfg)
