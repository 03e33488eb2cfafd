"""Kernel regression against a brute-force oracle and closed-form bandwidths."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semifit import nw_regress, silverman_bandwidth
from semifit.errors import DegenerateColumn, NumericalUnderflow, ShapeMismatch

from conftest import brute_force_nw


class TestSilverman:
    def test_closed_form_univariate(self):
        # sigma = 1 exactly for this column; rule gives (4/(3n))^(1/5).
        z = np.arange(100.0)
        z = (z - z.mean()) / z.std(ddof=1)
        h = silverman_bandwidth(z[:, None])
        np.testing.assert_allclose(h, (4.0 / 300.0) ** 0.2, rtol=1e-12)
        assert abs(h[0] - 0.4217) < 5e-4

    def test_homogeneous_in_scale(self):
        rng = np.random.default_rng(1)
        z = rng.standard_normal((40, 3))
        np.testing.assert_allclose(
            silverman_bandwidth(3.7 * z), 3.7 * silverman_bandwidth(z), rtol=1e-12
        )

    def test_constant_column_rejected(self):
        z = np.column_stack([np.arange(5.0), np.full(5, 2.0)])
        with pytest.raises(DegenerateColumn):
            silverman_bandwidth(z)

    def test_needs_two_rows(self):
        with pytest.raises(ShapeMismatch):
            silverman_bandwidth(np.ones((1, 2)))


class TestNWRegress:
    def test_single_training_point(self):
        out = nw_regress(np.array([[0.3, -0.2]]), np.array([7.5]),
                         z_eval=np.array([[100.0, -40.0]]), bandwidth=np.array([1.0, 1.0]))
        np.testing.assert_allclose(out, [7.5])

    def test_constant_targets(self):
        rng = np.random.default_rng(2)
        z = rng.standard_normal((20, 2))
        out = nw_regress(z, np.full(20, 3.25), z_eval=rng.standard_normal((7, 2)))
        np.testing.assert_allclose(out, 3.25, atol=1e-12)

    def test_hand_computed_three_points(self):
        z = np.array([0.0, 1.0, 2.0])
        t = np.array([0.0, 1.0, 4.0])
        w = np.exp(-0.5 * (z - 1.0) ** 2)
        expected = (w @ t) / w.sum()
        out = nw_regress(z, t, z_eval=np.array([1.0]), bandwidth=np.array([1.0]))
        np.testing.assert_allclose(out, [expected], rtol=1e-14)

    def test_matches_brute_force_random(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(2, 31))
            m = int(rng.integers(1, 12))
            d = int(rng.integers(1, 4))
            z_train = rng.standard_normal((n, d)) * rng.uniform(0.5, 3.0)
            z_eval = rng.standard_normal((m, d))
            targets = rng.standard_normal(n)
            bw = rng.uniform(0.2, 2.0, size=d)
            fast = nw_regress(z_train, targets, z_eval=z_eval, bandwidth=bw)
            slow = brute_force_nw(z_train, targets, z_eval, bw)
            assert np.max(np.abs(fast - slow)) <= 1e-10

    def test_matrix_targets_share_weights(self):
        rng = np.random.default_rng(3)
        z = rng.standard_normal((15, 2))
        t = rng.standard_normal((15, 4))
        ze = rng.standard_normal((6, 2))
        bw = np.array([0.8, 1.1])
        stacked = nw_regress(z, t, z_eval=ze, bandwidth=bw)
        for col in range(4):
            np.testing.assert_allclose(
                stacked[:, col], nw_regress(z, t[:, col], z_eval=ze, bandwidth=bw),
                rtol=1e-14,
            )

    def test_affine_shift_invariance(self):
        rng = np.random.default_rng(4)
        z = rng.standard_normal((25, 2))
        t = rng.standard_normal(25)
        ze = rng.standard_normal((9, 2))
        bw = np.array([0.7, 0.9])
        shift = np.array([13.0, -4.0])
        np.testing.assert_allclose(
            nw_regress(z, t, z_eval=ze, bandwidth=bw),
            nw_regress(z + shift, t, z_eval=ze + shift, bandwidth=bw),
            atol=1e-9,
        )

    def test_small_bandwidth_interpolates(self):
        z = np.array([[0.0], [1.0], [2.0]])
        t = np.array([5.0, -1.0, 2.0])
        out = nw_regress(z, t, z_eval=z, bandwidth=np.array([1e-3]))
        np.testing.assert_allclose(out, t, atol=1e-12)

    def test_underflow_nearest_fallback(self):
        z = np.array([[0.0], [1.0]])
        t = np.array([3.0, 9.0])
        far = np.array([[1e6]])
        out = nw_regress(z, t, z_eval=far, bandwidth=np.array([0.01]))
        np.testing.assert_allclose(out, [9.0])

    def test_underflow_raise_mode(self):
        z = np.array([[0.0], [1.0]])
        t = np.array([3.0, 9.0])
        with pytest.raises(NumericalUnderflow):
            nw_regress(z, t, z_eval=np.array([[1e6]]), bandwidth=np.array([0.01]),
                       on_underflow="raise")

    def test_shape_validation(self):
        z = np.zeros((5, 2))
        with pytest.raises(ShapeMismatch):
            nw_regress(z, np.zeros(4))
        with pytest.raises(ShapeMismatch):
            nw_regress(z, np.zeros(5), z_eval=np.zeros((3, 3)))
        with pytest.raises(ValueError):
            nw_regress(z, np.zeros(5), bandwidth=np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            nw_regress(z, np.zeros(5), on_underflow="explode")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_bounded_by_target_range(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 25))
        d = int(rng.integers(1, 4))
        z = rng.standard_normal((n, d))
        t = rng.standard_normal(n) * 5
        ze = rng.standard_normal((8, d)) * 2
        out = nw_regress(z, t, z_eval=ze)
        assert np.all(out >= t.min() - 1e-9) and np.all(out <= t.max() + 1e-9)
