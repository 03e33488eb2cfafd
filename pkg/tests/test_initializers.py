"""Least-squares and principal-Hessian starting values."""

import numpy as np
import pytest
import scipy.linalg

from semifit import ols_fit, phd_directions, projection_distance
from semifit.errors import RankDeficient, ShapeMismatch, SingularCovariance


class TestOLS:
    def test_exact_linear_recovery(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((50, 2))
        y = 3.0 + 2.0 * x[:, 0] - 1.0 * x[:, 1]
        fit = ols_fit(x, y)
        np.testing.assert_allclose(fit.intercept, 3.0, atol=1e-10)
        np.testing.assert_allclose(fit.coef, [2.0, -1.0], atol=1e-10)
        np.testing.assert_allclose(fit.predict(x), y, atol=1e-10)

    def test_constant_outcome_gives_mean(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((30, 3))
        fit = ols_fit(x, np.full(30, 4.5))
        np.testing.assert_allclose(fit.intercept, 4.5, atol=1e-10)
        np.testing.assert_allclose(fit.coef, 0.0, atol=1e-10)

    def test_no_intercept(self):
        x = np.array([[1.0], [2.0], [3.0]])
        fit = ols_fit(x, np.array([2.0, 4.0, 6.0]), intercept=False)
        assert fit.intercept == 0.0
        np.testing.assert_allclose(fit.coef, [2.0], atol=1e-12)

    def test_against_normal_equations(self):
        # Small noisy problem solved independently via the normal equations.
        rng = np.random.default_rng(2)
        x = rng.standard_normal((5, 2))
        y = rng.standard_normal(5)
        design = np.column_stack([np.ones(5), x])
        beta = np.linalg.solve(design.T @ design, design.T @ y)
        fit = ols_fit(x, y)
        np.testing.assert_allclose([fit.intercept, *fit.coef], beta, rtol=1e-10)

    def test_duplicate_column_rejected(self):
        rng = np.random.default_rng(3)
        col = rng.standard_normal(20)
        with pytest.raises(RankDeficient):
            ols_fit(np.column_stack([col, col]), rng.standard_normal(20))

    def test_shape_checks(self):
        with pytest.raises(ShapeMismatch):
            ols_fit(np.zeros((4, 2)), np.zeros(5))


class TestPHD:
    def test_recovers_curvature_direction(self):
        rng = np.random.default_rng(10)
        v = np.array([0.6, 0.8, 0.0, 0.0])
        x = rng.standard_normal((5000, 4))
        y = (x @ v) ** 2 + 0.1 * rng.standard_normal(5000)
        gamma = phd_directions(x, y, d=1)
        assert projection_distance(gamma, v[:, None]) < 0.15

    def test_matches_generalized_eigenproblem(self):
        # Directions of cov^-1 M are generalized eigenvectors of (M, cov);
        # solve that problem with an independent routine and compare spans.
        rng = np.random.default_rng(11)
        x = rng.standard_normal((200, 3))
        y = (x[:, 0] + 0.5 * x[:, 1]) ** 2 + rng.standard_normal(200)
        xc = x - x.mean(axis=0)
        yc = y - y.mean()
        cov = xc.T @ xc / 200
        m = (xc.T * yc) @ xc / 200
        evals, vecs = scipy.linalg.eig(m, cov)
        top = np.argsort(-np.abs(evals.real))[:2]
        oracle = vecs[:, top].real
        gamma = phd_directions(x, y, d=2)
        assert projection_distance(gamma, oracle) < 1e-8

    def test_columns_orthonormal(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((300, 5))
        y = rng.standard_normal(300)
        gamma = phd_directions(x, y, d=3)
        np.testing.assert_allclose(gamma.T @ gamma, np.eye(3), atol=1e-12)

    def test_shift_invariant_span(self):
        rng = np.random.default_rng(13)
        x = rng.standard_normal((400, 4))
        y = (x @ np.array([1.0, -1.0, 0.0, 0.0])) ** 2
        g0 = phd_directions(x, y, d=2)
        g1 = phd_directions(x + np.array([5.0, -3.0, 2.0, 0.5]), y, d=2)
        assert projection_distance(g0, g1) < 1e-8

    def test_singular_covariance_rejected(self):
        rng = np.random.default_rng(14)
        base = rng.standard_normal((50, 2))
        x = np.column_stack([base, base[:, 0] + base[:, 1]])
        with pytest.raises(SingularCovariance):
            phd_directions(x, rng.standard_normal(50), d=1)

    def test_dimension_bounds(self):
        rng = np.random.default_rng(15)
        x = rng.standard_normal((50, 3))
        y = rng.standard_normal(50)
        with pytest.raises(ShapeMismatch):
            phd_directions(x, y, d=3)
        with pytest.raises(ShapeMismatch):
            phd_directions(x, y, d=0)
