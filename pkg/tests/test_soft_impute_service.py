# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import numpy as np
import pytest
from scipy import linalg

from core.exceptions import InvalidInputError
from core.models.configs import SoftImputeConfig
from core.models.observed_matrix import ObservedMatrix
from core.services.soft_impute_service import (
    cv_select_lambda,
    lambda_grid,
    penalized_objective,
    soft_impute,
    split_observed,
    svt,
)


def _low_rank(rng, p=30, q=10, r=2):
    return rng.standard_normal((p, r)) @ rng.standard_normal((r, q))


class TestSvt:
    def test_thresholds_singular_values(self, rng):
        Z = rng.standard_normal((8, 4))
        s = linalg.svdvals(Z)
        lam = float(s[1])
        np.testing.assert_allclose(linalg.svdvals(svt(Z, lam))[:1], s[:1] - lam, rtol=1e-12)
        assert np.linalg.matrix_rank(svt(Z, lam)) == 1

    def test_large_threshold_gives_zero(self, rng):
        Z = rng.standard_normal((5, 3))
        np.testing.assert_array_equal(svt(Z, 1.01 * linalg.svdvals(Z)[0]), np.zeros((5, 3)))


class TestSoftImpute:
    def test_no_penalty_full_observation_returns_data(self, rng):
        Y = rng.standard_normal((6, 4))
        result = soft_impute(ObservedMatrix.from_dense(Y), lam=0.0)
        np.testing.assert_allclose(result.M_hat, Y, rtol=1e-12, atol=1e-12)
        assert result.iterations == 1

    def test_threshold_above_top_singular_value_gives_zero(self, rng):
        Y = rng.standard_normal((6, 4))
        mask = rng.random((6, 4)) < 0.6
        data = ObservedMatrix.from_dense(Y, mask)
        lam = 1.01 * float(linalg.svdvals(data.to_dense())[0])
        result = soft_impute(data, lam)
        np.testing.assert_array_equal(result.M_hat, np.zeros((6, 4)))
        assert result.iterations == 1

    def test_objective_never_increases(self, rng):
        Y = _low_rank(rng, 20, 6) + 0.3 * rng.standard_normal((20, 6))
        data = ObservedMatrix.from_dense(Y, rng.random((20, 6)) < 0.6)
        lam = 0.1 * float(linalg.svdvals(data.to_dense())[0])

        M = np.zeros(data.shape)
        previous = penalized_objective(data, M, lam)
        for _ in range(30):
            M = soft_impute(data, lam, tol=0.0, max_iters=1, warm_start=M).M_hat
            current = penalized_objective(data, M, lam)
            assert current <= previous + 1e-8
            previous = current

    def test_rank_decreases_with_penalty(self, rng):
        Y = _low_rank(rng, 15, 6, r=4) + 0.1 * rng.standard_normal((15, 6))
        data = ObservedMatrix.from_dense(Y)
        ranks = [
            np.linalg.matrix_rank(soft_impute(data, lam, tol=1e-12, max_iters=50).M_hat)
            for lam in np.geomspace(1e-3, 50.0, 8)
        ]
        assert all(a >= b for a, b in zip(ranks, ranks[1:]))

    def test_rejects_negative_penalty_and_empty_data(self, small_data):
        with pytest.raises(InvalidInputError):
            soft_impute(small_data, lam=-1.0)
        with pytest.raises(InvalidInputError):
            soft_impute(ObservedMatrix.from_entries(2, 2, []), lam=1.0)


class TestLambdaSelection:
    def test_grid_is_log_spaced_from_top_singular_value(self, small_data):
        grid = lambda_grid(small_data, 5)
        sigma1 = linalg.svdvals(small_data.to_dense())[0]
        assert grid[0] == pytest.approx(sigma1)
        assert grid[-1] == pytest.approx(sigma1 / 1e3)
        np.testing.assert_allclose(np.diff(np.log(grid)), np.log(1e-3) / 4)

    def test_split_sizes_and_disjointness(self, small_data):
        train, validation = split_observed(small_data, 20, seed=3)
        assert validation.size == round(small_data.size * 0.2)
        assert train.size + validation.size == small_data.size
        assert not set(train.entries()) & set(validation.entries())

    def test_degenerate_split_rejected(self):
        with pytest.raises(InvalidInputError):
            split_observed(ObservedMatrix.from_entries(2, 2, [(0, 0, 1.0)]), 20, seed=0)

    def test_single_candidate_is_refit_on_all_entries(self, small_data):
        config = SoftImputeConfig(grid_size=1, rng_seed=5)
        lam, M_hat = cv_select_lambda(small_data, config)
        train, _ = split_observed(small_data, config.validation_fraction, config.rng_seed)
        assert lam == pytest.approx(linalg.svdvals(train.to_dense())[0])
        warm = soft_impute(train, lam, config.tol, config.max_iters).M_hat
        expected = soft_impute(small_data, lam, config.tol, config.max_iters, warm_start=warm).M_hat
        np.testing.assert_array_equal(M_hat, expected)

    def test_noiseless_low_rank_prefers_smallest_penalty(self, rng):
        data = ObservedMatrix.from_dense(_low_rank(rng))
        config = SoftImputeConfig(grid_size=8, tol=1e-9, max_iters=500)
        lam, _ = cv_select_lambda(data, config)
        train, _ = split_observed(data, config.validation_fraction, config.rng_seed)
        assert lam == pytest.approx(lambda_grid(train, 8)[-1])

    def test_seeded_selection_is_deterministic(self, small_data):
        config = SoftImputeConfig(grid_size=6, rng_seed=11)
        lam_a, M_a = cv_select_lambda(small_data, config)
        lam_b, M_b = cv_select_lambda(small_data, config)
        assert lam_a == lam_b
        np.testing.assert_array_equal(M_a, M_b)
