"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with `pytest -s tests/test_acceptance.py` to see the verdict lines;
every tolerance is pinned here, not computed.
"""

import time

import numpy as np
import pytest

from oracles import (
    hessian_with_explicit_multiplier_derivative,
    kron_solve_sum_conjugation,
    scalar_projection,
)
from spdsimplex import (
    MatrixSimplex,
    NearestPoint,
    PovmMle,
    SolverConfig,
    WeightedLogDet,
    linalg,
    nearest_point_diagonal_oracle,
    solve,
    solve_rsd,
)
from spdsimplex import diagnostics


def verdict(num, ok, detail):
    print(f"[acceptance] criterion {num:>2}: {'PASS' if ok else 'FAIL'}  ({detail})")
    assert ok, detail


def random_states(rng, j, n):
    psi = rng.standard_normal((j, n)) + 1j * rng.standard_normal((j, n))
    return np.stack([np.outer(p, p.conj()) / np.vdot(p, p).real for p in psi])


def povm_problem(rng, n=2, k=3, j=4):
    states = random_states(rng, j, n)
    counts = rng.integers(1, 40, size=(j, k)).astype(float)
    return PovmMle(states, counts)


def pairing(x, a, b):
    sa = np.linalg.solve(x, a)
    sb = np.linalg.solve(x, b)
    return float(np.real(np.einsum("kij,kji->", sa, sb)))


SIZES = [(n, k) for n in (1, 2, 4, 8) for k in (2, 3, 8)]


def manifold_invariant_residuals(field, trials=50):
    rng = np.random.default_rng(0xC0FFEE if field == "real" else 0xBEEF)
    worst = {"idempotence": 0.0, "tangency": 0.0,
             "orthogonality": 0.0, "centering": 0.0}
    for n, k in SIZES:
        man = MatrixSimplex(n, k, field=field)
        for _ in range(trials):
            x = man.random_point(rng)
            z = man._randn_parts(rng)
            z /= linalg.frob_norm(z)
            eta = man.random_tangent(x, rng)
            xi = man.project(x, z)
            worst["idempotence"] = max(
                worst["idempotence"],
                linalg.frob_norm(man.project(x, xi) - xi)
                / (1.0 + linalg.frob_norm(z)))
            worst["tangency"] = max(
                worst["tangency"],
                linalg.frob_norm(xi.sum(axis=0))
                / max(1.0, linalg.frob_norm(z)))
            residual = linalg.symm(z) - xi
            worst["orthogonality"] = max(
                worst["orthogonality"],
                abs(pairing(x, residual, eta))
                / (1.0 + linalg.frob_norm(residual)))
            worst["centering"] = max(
                worst["centering"],
                linalg.frob_norm(man.retract(x, np.zeros_like(x)) - x))
    return worst


def test_criterion_1_manifold_invariant_suite():
    start = time.perf_counter()
    stats = {}
    for field in ("real", "complex"):
        stats[field] = manifold_invariant_residuals(field)
    elapsed = time.perf_counter() - start
    ok = elapsed < 60.0
    detail = [f"runtime {elapsed:.1f}s"]
    for field, worst in stats.items():
        ok &= worst["idempotence"] <= 1e-9
        ok &= worst["tangency"] <= 1e-9
        ok &= worst["orthogonality"] <= 1e-9
        ok &= worst["centering"] <= 1e-12
        detail.append(
            f"{field}: idem {worst['idempotence']:.1e}, tang "
            f"{worst['tangency']:.1e}, orth {worst['orthogonality']:.1e}, "
            f"cent {worst['centering']:.1e}")
    verdict(1, ok, "; ".join(detail))


def test_criterion_2_retraction_rigidity():
    man = MatrixSimplex(3, 3)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        x = man.random_point(rng)
        xi = man.random_tangent(x, rng)
        worst = max(worst, float(diagnostics.rigidity_ratios(man, x, xi).max()))
    verdict(2, worst <= 0.6, f"max halving ratio {worst:.3f} <= 0.6")


def test_criterion_3_gradient_taylor_slopes():
    cases = []
    rng = np.random.default_rng(31)
    for seed in range(5):
        man = MatrixSimplex(3, 3)
        targets = linalg.symm(rng.standard_normal((3, 3, 3)))
        cases.append((man, NearestPoint(targets), f"nearest/{seed}"))
        cases.append((man, WeightedLogDet(1.0 + np.arange(3), 3),
                      f"logdet/{seed}"))
        manc = MatrixSimplex(2, 3, field="complex")
        cases.append((manc, povm_problem(rng), f"povm/{seed}"))
    slopes = []
    for man, prob, label in cases:
        x = man.random_point(rng)
        xi = man.random_tangent(x, rng)
        slope = diagnostics.first_order_slope(man, prob, x, xi)
        slopes.append((label, slope))
    ok = all(abs(s - 2.0) <= 0.2 for _, s in slopes)
    lo = min(s for _, s in slopes)
    hi = max(s for _, s in slopes)
    verdict(3, ok, f"{len(slopes)} slope fits in [{lo:.2f}, {hi:.2f}], band 2.0+/-0.2")


def test_criterion_4_hessian_checks():
    rng = np.random.default_rng(4)
    # (a) self-adjointness over 20 random instances
    worst_sa = 0.0
    for i in range(20):
        field = "real" if i % 2 == 0 else "complex"
        man = MatrixSimplex(2 + i % 3, 2 + i % 4, field=field)
        prob = WeightedLogDet(1.0 + np.arange(man.K), man.n, field=field)
        x = man.random_point(rng)
        worst_sa = max(worst_sa,
                       diagnostics.selfadjointness_residual(man, prob, x, rng))
    ok_a = worst_sa <= 1e-8

    # (b) equivalence with the explicit multiplier-derivative oracle
    worst_oracle = 0.0
    for n, k in [(2, 2), (3, 3), (4, 4), (2, 4), (4, 2)]:
        for field in ("real", "complex"):
            man = MatrixSimplex(n, k, field=field)
            prob = WeightedLogDet(1.0 + np.arange(k), n, field=field)
            x = man.random_point(rng)
            xi = man.random_tangent(x, rng)
            ours = man.ehess_to_rhess(x, prob.egrad(x), prob.ehess(x, xi), xi)
            ref = hessian_with_explicit_multiplier_derivative(prob, x, xi)
            worst_oracle = max(
                worst_oracle,
                float(np.abs(ours - ref).max() / max(1.0, np.abs(ref).max())))
    ok_b = worst_oracle <= 1e-10

    # (c) second-order Taylor slope at the logdet analytic optimum
    man = MatrixSimplex(3, 3)
    prob = WeightedLogDet([1.0, 2.0, 3.0], 3)
    xstar = man.validate_point(prob.analytic_optimum())
    slope = diagnostics.second_order_slope(
        man, prob, xstar, man.random_tangent(xstar, rng))
    ok_c = abs(slope - 3.0) <= 0.3

    verdict(4, ok_a and ok_b and ok_c,
            f"selfadj {worst_sa:.1e} <= 1e-8; oracle gap {worst_oracle:.1e} "
            f"<= 1e-10; 2nd-order slope {slope:.2f} in 3.0+/-0.3")


def test_criterion_5_linear_system_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for trial in range(50):
        n = int(rng.integers(1, 5))
        k = int(rng.integers(2, 7))
        complex_field = bool(trial % 2)
        b = rng.standard_normal((k, n, n))
        if complex_field:
            b = b + 1j * rng.standard_normal((k, n, n))
        xs = b @ np.conj(np.swapaxes(b, -1, -2)) + 0.1 * np.eye(n)
        xs /= np.abs(np.linalg.eigvalsh(xs)).max()
        r = rng.standard_normal((n, n))
        if complex_field:
            r = r + 1j * rng.standard_normal((n, n))
        r = linalg.symm(r)
        ours = linalg.solve_sum_conjugation(xs, r, tol=1e-12)
        ref = kron_solve_sum_conjugation(xs, r)
        worst = max(worst, float(np.abs(ours - ref).max()
                                 / max(1.0, np.abs(ref).max())))
    verdict(5, worst <= 1e-9, f"50 instances, worst relative gap {worst:.1e} <= 1e-9")


def test_criterion_6_solver_to_analytic_convergence():
    man = MatrixSimplex(5, 4)
    prob = WeightedLogDet([1.0, 2.0, 3.0, 4.0], 5)
    xstar = prob.analytic_optimum()
    x0 = man.random_point(np.random.default_rng(6))
    budgets = {"rsd": 500, "rcg": 200, "rtr": 50}
    details = []
    ok = True
    for method, budget in budgets.items():
        start = time.perf_counter()
        x, trace = solve(man, prob, x0, SolverConfig(
            method=method, tol_gradnorm=1e-7, max_iter=budget))
        elapsed = time.perf_counter() - start
        dist = float(np.linalg.norm(x - xstar))
        iters = len(trace) - 1
        ok &= dist <= 1e-6 and iters <= budget and elapsed < 5.0
        details.append(f"{method}: dist {dist:.1e}, {iters}/{budget} iters, "
                       f"{elapsed:.2f}s")
    verdict(6, ok, "; ".join(details))


def test_criterion_7_solver_to_oracle_convergence():
    worst = 0.0
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        man = MatrixSimplex(3, 4)
        diags = rng.dirichlet(np.ones(4), size=3).T * 0.5 + 0.1
        targets = np.zeros((4, 3, 3))
        for d in range(3):
            targets[:, d, d] = diags[:, d] + rng.uniform(-0.05, 0.05, size=4)
        oracle = nearest_point_diagonal_oracle(targets)
        prob = NearestPoint(targets)
        x, trace = solve(man, prob, man.random_point(rng), SolverConfig(
            method="rtr", tol_gradnorm=1e-9, max_iter=100))
        worst = max(worst, float(np.linalg.norm(x - oracle)))
    verdict(7, worst <= 1e-5, f"5 seeds, worst RTR-vs-oracle gap {worst:.1e} <= 1e-5")


def test_criterion_8_scalar_reduction():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(2, 9))
        man = MatrixSimplex(1, k)
        x = man.random_point(rng)
        z = rng.standard_normal((k, 1, 1))
        ours = man.project(x, z).ravel()
        ref = scalar_projection(x.ravel(), z.ravel())
        worst = max(worst, float(np.abs(ours - ref).max()))
    verdict(8, worst <= 1e-12, f"100 scalar instances, worst gap {worst:.1e} <= 1e-12")


def test_criterion_9_hermitian_mode():
    rng = np.random.default_rng(9)
    # criteria 1-4 in complex arithmetic (criterion 1 complex residuals are
    # recomputed here at smaller trial count; the full pass runs in
    # criterion 1 itself)
    man = MatrixSimplex(3, 3, field="complex")
    ok = True
    details = []

    x = man.random_point(rng)
    xi = man.random_tangent(x, rng)
    ratios = diagnostics.rigidity_ratios(man, x, xi)
    ok &= float(ratios.max()) <= 0.6
    details.append(f"rigidity {ratios.max():.2f}")

    prob = WeightedLogDet([1.0, 2.0, 3.0], 3, field="complex")
    slope1 = diagnostics.first_order_slope(man, prob, x, xi)
    ok &= abs(slope1 - 2.0) <= 0.2
    details.append(f"slope1 {slope1:.2f}")

    sa = diagnostics.selfadjointness_residual(man, prob, x, rng)
    ok &= sa <= 1e-8
    details.append(f"selfadj {sa:.1e}")

    xstar = man.validate_point(prob.analytic_optimum())
    slope2 = diagnostics.second_order_slope(
        man, prob, xstar, man.random_tangent(xstar, rng))
    ok &= abs(slope2 - 3.0) <= 0.3
    details.append(f"slope2 {slope2:.2f}")

    # Bernoulli sanity: single maximally-mixed probe state, two effects
    man2 = MatrixSimplex(2, 2, field="complex")
    counts = np.array([[30.0, 70.0]])
    prob2 = PovmMle(np.array([np.eye(2, dtype=complex) / 2]), counts)
    xf, trace = solve_rsd(man2, prob2, man2.random_point(rng),
                          SolverConfig(tol_gradnorm=1e-6, max_iter=500))
    ratio = float(np.real(np.trace(xf[0])) / 2.0)
    ok &= abs(ratio - 0.3) <= 1e-4
    details.append(f"bernoulli trace ratio {ratio:.6f} vs 0.3")

    verdict(9, ok, "; ".join(details))


def test_criterion_10_cost_scaling_linear_in_k():
    rows = diagnostics.bench_geometry_ops([32], [2, 4, 8, 16], seed=0,
                                          repeats=15, calls=8)
    ks, times = zip(*[(k, ms) for op, n, k, ms in rows if op == "project"])
    slope = float(np.polyfit(np.log(ks), np.log(times), 1)[0])
    times_str = ", ".join(f"K={k}: {t:.3f}ms" for k, t in zip(ks, times))
    verdict(10, 0.7 <= slope <= 1.3,
            f"project log-log slope {slope:.2f} in [0.7, 1.3]; {times_str}")
