# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import numpy as np
import pytest

from core.exceptions import InvalidInputError
from core.models.hyperparameters import Hyperparameters
from core.models.observed_matrix import ObservedMatrix


class TestObservedMatrix:
    def test_entries_are_canonicalized(self):
        data = ObservedMatrix.from_entries(3, 4, [(2, 1, 5.0), (0, 3, 1.0), (0, 0, 2.0)])
        assert data.rows.tolist() == [0, 0, 2]
        assert data.cols.tolist() == [0, 3, 1]
        assert data.values.tolist() == [2.0, 1.0, 5.0]

    def test_row_index_sets_cover_omega(self):
        data = ObservedMatrix.from_entries(3, 4, [(2, 3, 1.0), (2, 0, 1.0), (0, 1, 1.0)])
        sets = data.row_index_sets
        assert [s.tolist() for s in sets] == [[1], [], [0, 3]]
        assert sum(s.size for s in sets) == data.size

    def test_duplicate_entry_rejected(self):
        with pytest.raises(InvalidInputError, match="Duplicate"):
            ObservedMatrix.from_entries(2, 2, [(0, 1, 1.0), (0, 1, 2.0)])

    @pytest.mark.parametrize("entry", [(2, 0, 1.0), (0, 2, 1.0), (-1, 0, 1.0)])
    def test_out_of_range_rejected(self, entry):
        with pytest.raises(InvalidInputError):
            ObservedMatrix.from_entries(2, 2, [entry])

    def test_non_finite_value_rejected(self):
        with pytest.raises(InvalidInputError):
            ObservedMatrix.from_entries(2, 2, [(0, 0, float("nan"))])

    def test_row_patterns_group_identical_sets(self):
        mask = np.array([[1, 0, 1], [0, 1, 0], [1, 0, 1], [0, 0, 0]], dtype=bool)
        data = ObservedMatrix.from_dense(np.arange(12.0).reshape(4, 3), mask)
        patterns = data.row_patterns()
        assert [(omega.tolist(), rows.tolist()) for omega, rows in patterns] == [
            ([0, 2], [0, 2]),
            ([1], [1]),
            ([], [3]),
        ]

    def test_dense_round_trip_and_transpose(self, rng):
        Y = rng.standard_normal((4, 3))
        mask = rng.random((4, 3)) < 0.5
        mask[0, 0] = True
        data = ObservedMatrix.from_dense(Y, mask)
        np.testing.assert_array_equal(data.mask(), mask)
        np.testing.assert_array_equal(data.to_dense(), np.where(mask, Y, 0.0))
        np.testing.assert_array_equal(data.transpose().to_dense(), np.where(mask, Y, 0.0).T)

    def test_subset_keeps_shape(self, small_data):
        part = small_data.subset(np.arange(0, small_data.size, 2))
        assert part.shape == small_data.shape
        assert part.size == (small_data.size + 1) // 2


class TestHyperparameters:
    def test_rejects_asymmetric_sigma(self):
        with pytest.raises(InvalidInputError, match="symmetric"):
            Hyperparameters(np.array([[1.0, 0.5], [0.0, 1.0]]), 1.0)

    def test_rejects_indefinite_sigma(self):
        with pytest.raises(InvalidInputError, match="semidefinite"):
            Hyperparameters(np.array([[1.0, 2.0], [2.0, 1.0]]), 1.0)

    @pytest.mark.parametrize("sigma_sq", [0.0, -1.0, float("inf")])
    def test_rejects_bad_noise_variance(self, sigma_sq):
        with pytest.raises(InvalidInputError):
            Hyperparameters(np.eye(2), sigma_sq)

    def test_accepts_rank_deficient_sigma(self):
        v = np.array([[1.0], [2.0], [3.0]])
        params = Hyperparameters(v @ v.T, 0.5)
        assert params.q == 3
