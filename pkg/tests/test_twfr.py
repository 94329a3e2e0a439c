"""Pooling vector and GWRP behavior."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from twfr_gmm import LogMelSpectrogram, gwrp, pool_sorted, pooling_vector, row_descending_sort


class TestPoolingVector:
    def test_mean_case(self):
        """r=1 gives uniform weights (average pooling)."""
        pv = pooling_vector(1.0, 4)
        assert_allclose(pv.weights, [0.25, 0.25, 0.25, 0.25], rtol=0, atol=0)
        assert pv.z == 4.0

    def test_max_case(self):
        """r=0 gives a one-hot on the top-ranked frame (max pooling)."""
        pv = pooling_vector(0.0, 3)
        assert pv.weights.tolist() == [1.0, 0.0, 0.0]

    def test_half_case(self):
        """r=0.5, N=3: z = 1 + 0.5 + 0.25 = 1.75, weights = [4/7, 2/7, 1/7]."""
        pv = pooling_vector(0.5, 3)
        assert pv.z == 1.75
        assert_allclose(pv.weights, [4 / 7, 2 / 7, 1 / 7], atol=1e-15)

    def test_normalized_nonincreasing_nonnegative(self):
        for r in np.arange(0.0, 1.0001, 0.01):
            for n in (1, 2, 5, 64, 311):
                pv = pooling_vector(float(round(r, 2)), n)
                assert abs(pv.weights.sum() - 1.0) <= 1e-12
                assert np.all(np.diff(pv.weights) <= 0)
                assert np.all(pv.weights >= 0)

    def test_large_n_normalization(self):
        pv = pooling_vector(0.999, 10000)
        assert abs(pv.weights.sum() - 1.0) <= 1e-12

    @pytest.mark.parametrize("r", [-0.01, 1.01, 2.0, -5.0])
    def test_r_out_of_range(self, r):
        with pytest.raises(ValueError):
            pooling_vector(r, 4)

    def test_bad_n_frames(self):
        with pytest.raises(ValueError):
            pooling_vector(0.5, 0)


class TestRowSort:
    def test_single_row(self):
        out = row_descending_sort(np.array([[1.0, 3.0, 2.0]]))
        assert out.tolist() == [[3.0, 2.0, 1.0]]

    def test_constant_row(self):
        out = row_descending_sort(np.array([[5.0, 5.0, 5.0]]))
        assert out.tolist() == [[5.0, 5.0, 5.0]]

    def test_rows_independent(self):
        out = row_descending_sort(np.array([[1.0, 3.0, 2.0], [0.0, -1.0, 4.0]]))
        assert out.tolist() == [[3.0, 2.0, 1.0], [4.0, 0.0, -1.0]]

    def test_input_unmodified(self):
        x = np.array([[1.0, 3.0, 2.0]])
        row_descending_sort(x)
        assert x.tolist() == [[1.0, 3.0, 2.0]]


class TestGwrp:
    def test_max_pooling(self):
        x = np.array([[1.0, 3.0, 2.0], [0.0, 0.0, 0.0]])
        assert gwrp(x, 0.0).tolist() == [3.0, 0.0]

    def test_mean_pooling(self):
        x = np.array([[1.0, 3.0, 2.0], [0.0, 0.0, 0.0]])
        assert_allclose(gwrp(x, 1.0), [2.0, 0.0], atol=1e-12)

    def test_hand_evaluated_half(self):
        """[[1,3,2]], r=0.5 -> (3*4 + 2*2 + 1*1)/7 = 17/7."""
        assert_allclose(gwrp(np.array([[1.0, 3.0, 2.0]]), 0.5), [17 / 7], atol=1e-15)

    def test_degeneracy_random(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            m = int(rng.integers(1, 20))
            n = int(rng.integers(1, 40))
            x = rng.normal(0, 10, (m, n))
            assert_allclose(gwrp(x, 0.0), x.max(axis=1), atol=1e-9)
            assert_allclose(gwrp(x, 1.0), x.mean(axis=1), atol=1e-9)

    def test_convexity_bounds(self):
        rng = np.random.default_rng(12)
        x = rng.normal(0, 5, (16, 30))
        for r in (0.0, 0.3, 0.7, 1.0):
            v = gwrp(x, r)
            assert np.all(v >= x.min(axis=1) - 1e-12)
            assert np.all(v <= x.max(axis=1) + 1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(8, 25))
        perm = rng.permutation(25)
        for r in (0.0, 0.2, 0.55, 1.0):
            assert np.array_equal(gwrp(x, r), gwrp(x[:, perm], r))

    def test_accepts_spectrogram_type(self):
        spec = LogMelSpectrogram(np.array([[1.0, 3.0, 2.0]]))
        assert_allclose(gwrp(spec, 0.5), [17 / 7], atol=1e-15)

    def test_pool_sorted_length_mismatch(self):
        pv = pooling_vector(0.5, 4)
        with pytest.raises(ValueError):
            pool_sorted(np.ones((2, 3)), pv)
