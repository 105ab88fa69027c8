# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import numpy as np

from core.exceptions import InvalidInputError
from core.models.observed_matrix import ObservedMatrix


def _check_shapes(M_hat: np.ndarray, M_true: np.ndarray):
    if M_hat.shape != M_true.shape:
        raise InvalidInputError(f"Shape mismatch: estimate {M_hat.shape} vs truth {M_true.shape}")


def _normalized_error(diff: np.ndarray, reference: np.ndarray) -> float:
    denominator = float(np.sum(reference * reference))
    if denominator == 0.0:
        raise InvalidInputError("Normalized error is undefined: the reference entries are all zero")
    return float(np.sqrt(np.sum(diff * diff) / denominator))


def error1(M_hat: np.ndarray, M_true: np.ndarray) -> float:
    """||M_hat - M||_F / ||M||_F over all entries."""
    M_hat, M_true = np.asarray(M_hat, dtype=np.float64), np.asarray(M_true, dtype=np.float64)
    _check_shapes(M_hat, M_true)
    return _normalized_error(M_hat - M_true, M_true)


def error2(M_hat: np.ndarray, M_true: np.ndarray, omega: np.ndarray) -> float:
    """Normalized error restricted to the unobserved positions (i, j) not in Omega.

    omega is either a boolean p x q mask or an ObservedMatrix.
    """
    M_hat, M_true = np.asarray(M_hat, dtype=np.float64), np.asarray(M_true, dtype=np.float64)
    _check_shapes(M_hat, M_true)
    mask = omega.mask() if isinstance(omega, ObservedMatrix) else np.asarray(omega, dtype=bool)
    if mask.shape != M_true.shape:
        raise InvalidInputError(f"Mask shape {mask.shape} does not match {M_true.shape}")

    unobserved = ~mask
    if not np.any(unobserved):
        raise InvalidInputError("error2 is undefined when every entry is observed")
    return _normalized_error(M_hat[unobserved] - M_true[unobserved], M_true[unobserved])


def holdout_error(M_hat: np.ndarray, heldout: ObservedMatrix) -> float:
    """Normalized error on held-out observed entries; the ratio reported for real ratings data."""
    if heldout.size == 0:
        raise InvalidInputError("No held-out entries to evaluate")
    predicted = np.asarray(M_hat, dtype=np.float64)[heldout.rows, heldout.cols]
    return _normalized_error(predicted - heldout.values, heldout.values)
