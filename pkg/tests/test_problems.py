import numpy as np
import pytest

from spdsimplex import (
    MatrixSimplex,
    NearestPoint,
    PovmMle,
    WeightedLogDet,
    nearest_point_diagonal_oracle,
    project_to_simplex,
)
from spdsimplex import diagnostics, linalg
from spdsimplex.errors import BoundaryHit, InvalidInput


def random_states(rng, j, n):
    psi = rng.standard_normal((j, n)) + 1j * rng.standard_normal((j, n))
    return np.stack([np.outer(p, p.conj()) / np.vdot(p, p).real for p in psi])


class TestNearestPoint:
    def test_zero_residual(self, rng):
        man = MatrixSimplex(3, 3)
        x = man.random_point(rng)
        prob = NearestPoint(x)
        assert prob.cost(x) == 0.0
        np.testing.assert_array_equal(prob.egrad(x), np.zeros_like(x))

    def test_cost_value(self):
        targets = np.stack([np.eye(2) * 0.5, np.eye(2) * 0.5])
        x = np.stack([np.eye(2) * 0.25, np.eye(2) * 0.75])
        prob = NearestPoint(targets)
        assert prob.cost(x) == pytest.approx(2 * 0.5 * 0.25 ** 2 * 2)

    def test_hessian_is_identity_map(self, rng):
        man = MatrixSimplex(3, 2)
        x = man.random_point(rng)
        prob = NearestPoint(x)
        xi = man.random_tangent(x, rng)
        np.testing.assert_array_equal(prob.ehess(x, xi), xi)

    def test_targets_symmetrized_on_ingest(self, rng):
        raw = rng.standard_normal((2, 3, 3))
        prob = NearestPoint(raw)
        np.testing.assert_allclose(prob.targets, linalg.symm(raw))

    def test_shape_mismatch(self, rng):
        prob = NearestPoint(rng.standard_normal((2, 3, 3)))
        with pytest.raises(InvalidInput):
            prob.cost(np.zeros((2, 4, 4)))


class TestWeightedLogDet:
    def test_scalar_cost(self):
        prob = WeightedLogDet([1.0, 1.0], 1)
        x = np.array([[[0.5]], [[0.5]]])
        assert prob.cost(x) == pytest.approx(-2.0 * np.log(0.5), rel=1e-12)

    def test_scalar_gradient(self):
        prob = WeightedLogDet([2.0, 3.0], 1)
        x = np.array([[[0.25]], [[0.75]]])
        np.testing.assert_allclose(
            prob.egrad(x).ravel(), [-2.0 / 0.25, -3.0 / 0.75], rtol=1e-12)

    def test_scalar_hessian(self):
        prob = WeightedLogDet([2.0, 3.0], 1)
        x = np.array([[[0.25]], [[0.75]]])
        xi = np.array([[[0.1]], [[-0.1]]])
        np.testing.assert_allclose(
            prob.ehess(x, xi).ravel(),
            [2.0 * 0.1 / 0.25 ** 2, 3.0 * (-0.1) / 0.75 ** 2], rtol=1e-12)

    def test_weight_validation(self):
        with pytest.raises(InvalidInput):
            WeightedLogDet([1.0, -1.0], 2)
        with pytest.raises(InvalidInput):
            WeightedLogDet([1.0], 2)

    def test_analytic_optimum_equal_weights(self):
        prob = WeightedLogDet([1.0, 1.0], 3)
        np.testing.assert_allclose(
            prob.analytic_optimum(), np.stack([np.eye(3) / 2] * 2))

    def test_analytic_optimum_weighted(self):
        prob = WeightedLogDet([1.0, 3.0], 2)
        xstar = prob.analytic_optimum()
        np.testing.assert_allclose(xstar[0], 0.25 * np.eye(2))
        np.testing.assert_allclose(xstar[1], 0.75 * np.eye(2))

    @pytest.mark.parametrize("field", ["real", "complex"])
    def test_riemannian_gradient_vanishes_at_optimum(self, field):
        man = MatrixSimplex(3, 4, field=field)
        prob = WeightedLogDet([1.0, 2.0, 3.0, 4.0], 3, field=field)
        xstar = man.validate_point(prob.analytic_optimum())
        grad = man.egrad_to_rgrad(xstar, prob.egrad(xstar))
        assert man.norm(xstar, grad) <= 1e-10


class TestPovmMle:
    def test_zero_counts(self, rng):
        man = MatrixSimplex(2, 2, field="complex")
        prob = PovmMle(random_states(rng, 3, 2), np.zeros((3, 2)))
        x = man.random_point(rng)
        assert prob.cost(x) == 0.0
        np.testing.assert_array_equal(prob.egrad(x), np.zeros_like(x))

    def test_ingest_validation(self, rng):
        states = random_states(rng, 2, 2)
        counts = np.ones((2, 2))
        with pytest.raises(InvalidInput):
            PovmMle(states, -counts)
        with pytest.raises(InvalidInput):
            PovmMle(2.0 * states, counts)  # trace 2
        bad = states.copy()
        bad[0, 0, 1] += 0.3  # not Hermitian
        with pytest.raises(InvalidInput):
            PovmMle(bad, counts)
        with pytest.raises(InvalidInput):
            PovmMle(states - 0.5 * np.eye(2), counts)  # not PSD

    def test_cost_matches_direct_sum(self, rng):
        states = random_states(rng, 3, 2)
        counts = rng.integers(0, 20, size=(3, 2)).astype(float)
        prob = PovmMle(states, counts)
        man = MatrixSimplex(2, 2, field="complex")
        x = man.random_point(rng)
        expected = -sum(
            counts[j, i] * np.log(np.real(np.trace(states[j] @ x[i])))
            for j in range(3) for i in range(2))
        assert prob.cost(x) == pytest.approx(expected, rel=1e-12)

    def test_gradient_slope(self, rng):
        man = MatrixSimplex(2, 3, field="complex")
        states = random_states(rng, 4, 2)
        counts = rng.integers(1, 30, size=(4, 3)).astype(float)
        prob = PovmMle(states, counts)
        x = man.random_point(rng)
        xi = man.random_tangent(x, rng)
        slope = diagnostics.first_order_slope(man, prob, x, xi)
        assert abs(slope - 2.0) <= 0.2


class TestSimplexProjection:
    def test_hand_example(self):
        np.testing.assert_allclose(project_to_simplex([0.8, 0.6]), [0.6, 0.4])

    def test_feasible_point_unchanged(self):
        v = np.array([0.2, 0.3, 0.5])
        np.testing.assert_allclose(project_to_simplex(v), v, atol=1e-15)

    def test_projection_properties(self, rng):
        # feasibility plus the variational inequality of a convex projection
        for _ in range(25):
            v = 3.0 * rng.standard_normal(6)
            p = project_to_simplex(v)
            assert p.min() >= 0
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            y = rng.dirichlet(np.ones(6))
            assert np.dot(y - p, v - p) <= 1e-10


class TestDiagonalOracle:
    def test_feasible_targets_returned(self):
        targets = np.stack([np.diag([0.3, 0.6]), np.diag([0.7, 0.4])])
        np.testing.assert_allclose(
            nearest_point_diagonal_oracle(targets), targets, atol=1e-15)

    def test_scalar_hand_example(self):
        targets = np.array([[[0.8]], [[0.6]]])
        out = nearest_point_diagonal_oracle(targets)
        np.testing.assert_allclose(out.ravel(), [0.6, 0.4], atol=1e-15)

    def test_boundary_rejected(self):
        targets = np.stack([np.diag([5.0, 0.5]), np.diag([-5.0, 0.5])])
        with pytest.raises(BoundaryHit):
            nearest_point_diagonal_oracle(targets)

    def test_non_diagonal_rejected(self, rng):
        with pytest.raises(InvalidInput):
            nearest_point_diagonal_oracle(rng.standard_normal((2, 3, 3)))

    def test_oracle_is_stationary(self, rng):
        # the oracle point should zero the Riemannian gradient
        man = MatrixSimplex(3, 4)
        diags = rng.dirichlet(np.ones(4), size=3).T + 0.05
        diags /= diags.sum(axis=0)
        targets = np.zeros((4, 3, 3))
        for d in range(3):
            targets[:, d, d] = diags[:, d] + rng.uniform(-0.02, 0.02, size=4)
        xstar = nearest_point_diagonal_oracle(targets)
        man.validate_point(xstar)
        prob = NearestPoint(targets)
        grad = man.egrad_to_rgrad(xstar, prob.egrad(xstar))
        assert man.norm(xstar, grad) <= 1e-9
