# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
"""Closed-form estimators of a fully observed normal mean matrix Y ~ N(M, I_p, I_q)."""
import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Union

import numpy as np
from scipy import linalg

from core.exceptions import ConditioningError, DimensionError, InvalidInputError, RankDeficiencyError
from core.models.hyperparameters import PSD_RTOL

logger = logging.getLogger(__name__)

ILL_CONDITIONED = 1e12


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """A p x q matrix held with p >= q; wider input is transposed and the flag recorded."""

    values: np.ndarray
    transposed: bool = False

    @classmethod
    def from_array(cls, Y: Union[np.ndarray, "DenseMatrix"]) -> "DenseMatrix":
        if isinstance(Y, DenseMatrix):
            return Y
        Y = np.array(Y, dtype=np.float64, ndmin=2)
        if Y.ndim != 2:
            raise InvalidInputError("Expected a 2-D matrix")
        if not np.all(np.isfinite(Y)):
            raise InvalidInputError("Matrix entries must be finite")
        if Y.shape[0] < Y.shape[1]:
            return cls(Y.T.copy(), transposed=True)
        return cls(Y, transposed=False)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def q(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray) -> "DenseMatrix":
        return DenseMatrix(values, transposed=self.transposed)

    def to_array(self) -> np.ndarray:
        """The matrix in the caller's original orientation."""
        return self.values.T if self.transposed else self.values


class SvsPriorValue(NamedTuple):
    log_density: float
    diverges: bool


def _shrinkage_constant(Y: DenseMatrix) -> int:
    c = Y.p - Y.q - 1
    if c <= 0:
        raise DimensionError(f"Efron-Morris estimator needs p - q - 1 > 0, got p={Y.p}, q={Y.q}")
    return c


def efron_morris(Y: Union[np.ndarray, DenseMatrix], positive_part: bool = False) -> DenseMatrix:
    """Y (I - (p - q - 1) (Y^T Y)^{-1}), solved against Y^T Y without forming its inverse.

    Falls back to the singular value form when Y^T Y is ill-conditioned; the two are
    algebraically identical. The positive-part variant only exists in that form.
    """
    Y = DenseMatrix.from_array(Y)
    c = _shrinkage_constant(Y)
    if positive_part:
        return efron_morris_svd_form(Y, positive_part=True)

    gram = Y.values.T @ Y.values
    condition = np.linalg.cond(gram)
    if not np.isfinite(condition) or condition > ILL_CONDITIONED:
        logger.warning("Y^T Y is ill-conditioned (cond=%.3e); using the singular value form", condition)
        return efron_morris_svd_form(Y)

    try:
        cho = linalg.cho_factor(gram, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise RankDeficiencyError("Y^T Y is singular to working precision") from e
    correction = linalg.cho_solve(cho, Y.values.T, check_finite=False).T
    return Y.with_values(Y.values - c * correction)


def efron_morris_svd_form(Y: Union[np.ndarray, DenseMatrix], positive_part: bool = False) -> DenseMatrix:
    """Shrink each singular value s to (1 - (p - q - 1) / s^2) s, keeping the singular vectors."""
    Y = DenseMatrix.from_array(Y)
    c = _shrinkage_constant(Y)
    U, s, Vt = linalg.svd(Y.values, full_matrices=False)
    if s[-1] <= np.finfo(float).eps * max(Y.p, Y.q) * s[0]:
        raise RankDeficiencyError("Y is rank deficient; Y^T Y is singular")

    factors = 1.0 - c / s ** 2
    if np.any(factors < 0):
        if positive_part:
            factors = np.maximum(factors, 0.0)
        else:
            logger.warning("%d singular value(s) shrink past zero (s^2 < p - q - 1)", int(np.sum(factors < 0)))
    return Y.with_values((U * (factors * s)) @ Vt)


def bayes_given_sigma(Y: Union[np.ndarray, DenseMatrix], Sigma: np.ndarray) -> DenseMatrix:
    """Posterior mean Y (I - (I + Sigma)^{-1}) under rows m_i ~ N(0, Sigma) and unit noise.

    Sigma acts on the columns of Y as given, so wide Y is solved without transposing.
    """
    Y = DenseMatrix.from_array(Y)
    values = Y.to_array()
    q = values.shape[1]
    Sigma = np.array(Sigma, dtype=np.float64, ndmin=2)
    if Sigma.shape != (q, q):
        raise DimensionError(f"Sigma must be {q}x{q}, got {Sigma.shape}")
    if not np.allclose(Sigma, Sigma.T, rtol=1e-12, atol=0.0):
        raise InvalidInputError("Sigma must be symmetric")
    eigenvalues = linalg.eigvalsh(Sigma)
    if eigenvalues[0] < -PSD_RTOL * max(eigenvalues[-1], 0.0):
        raise InvalidInputError(f"Sigma must be positive semidefinite (smallest eigenvalue {eigenvalues[0]:.3e})")

    try:
        cho = linalg.cho_factor(np.eye(q) + Sigma, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise ConditioningError("I + Sigma is not positive definite to working precision") from e
    posterior = values - linalg.cho_solve(cho, values.T, check_finite=False).T
    return Y.with_values(posterior.T if Y.transposed else posterior)


def log_svs_prior(M: Union[np.ndarray, DenseMatrix]) -> SvsPriorValue:
    """log det(M^T M)^{-(p - q - 1)/2}, from the singular values of M.

    The density is unbounded where M loses rank; there the result is +inf with diverges=True.
    The sign is positive because the exponent is negative, so test `diverges` rather than
    comparing log_density against a negative-infinity sentinel.
    """
    M = DenseMatrix.from_array(M)
    c = _shrinkage_constant(M)
    s = linalg.svdvals(M.values)
    if s[-1] == 0.0 or s[-1] <= np.finfo(float).eps * max(M.p, M.q) * s[0]:
        return SvsPriorValue(log_density=float("inf"), diverges=True)
    return SvsPriorValue(log_density=float(-c * np.sum(np.log(s))), diverges=False)


def monte_carlo_risk(
    estimator: Callable[[np.ndarray], Union[np.ndarray, DenseMatrix]],
    M: np.ndarray,
    replicates: int = 1000,
    sigma_sq: float = 1.0,
    seed: Optional[int] = 0,
) -> float:
    """Average Frobenius loss ||estimator(Y) - M||^2 over Y = M + N(0, sigma^2) draws."""
    M = np.asarray(M, dtype=np.float64)
    rng = np.random.default_rng(seed)
    scale = np.sqrt(sigma_sq)
    total = 0.0
    for _ in range(replicates):
        Y = M + scale * rng.standard_normal(M.shape)
        estimate = estimator(Y)
        if isinstance(estimate, DenseMatrix):
            estimate = estimate.to_array()
        total += float(np.sum((estimate - M) ** 2))
    return total / replicates
