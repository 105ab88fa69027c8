# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy import linalg

from core.exceptions import ConditioningError, InvalidInputError
from core.models.hyperparameters import Hyperparameters, RowPosterior
from core.models.observed_matrix import ObservedMatrix

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PatternFactor:
    """Cholesky factor of sigma^2 I + Sigma[omega, omega] and its log-determinant."""

    omega: np.ndarray
    cho: Tuple[np.ndarray, bool]
    logdet: float


@dataclass(frozen=True)
class PatternMoments:
    rows: np.ndarray
    means: np.ndarray
    cov: np.ndarray
    loglik: np.ndarray


@dataclass(frozen=True, eq=False)
class EStepStats:
    """Posterior moments of every row plus the observed-data log-likelihood at the same parameters."""

    M: np.ndarray
    R_diag: np.ndarray
    R_sum: np.ndarray
    loglik: float


class PosteriorService:
    """Closed-form inference for the row model m_i ~ N(0, Sigma), y_ij | m_i ~ N(m_ij, sigma^2).

    Factorizations are cached per observation pattern (sorted Omega_i), so rows
    sharing a pattern reuse one Cholesky factor. Sigma itself is never inverted.
    """

    def __init__(self, params: Hyperparameters):
        self.params = params
        self._cache: Dict[bytes, PatternFactor] = {}

    def factorize(self, omega: np.ndarray) -> PatternFactor:
        omega = np.asarray(omega, dtype=np.int64)
        key = omega.tobytes()
        cached = self._cache.get(key)
        if cached is not None:
            return cached

        k = omega.size
        shifted = self.params.Sigma[np.ix_(omega, omega)] + self.params.sigma_sq * np.eye(k)
        try:
            cho = linalg.cho_factor(shifted, lower=True, check_finite=False)
        except linalg.LinAlgError as e:
            raise ConditioningError(
                f"Cholesky factorization of sigma^2 I + Sigma[omega, omega] failed for a pattern of size {k}"
            ) from e

        logdet = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
        factor = PatternFactor(omega=omega, cho=cho, logdet=logdet)
        self._cache[key] = factor
        return factor

    def row_posterior(self, row_values: np.ndarray, omega: np.ndarray) -> RowPosterior:
        omega, z = _canonical_row(row_values, omega, self.params.q)
        Sigma = self.params.Sigma
        if omega.size == 0:
            return RowPosterior(mean=np.zeros(self.params.q), cov=Sigma.copy())

        factor = self.factorize(omega)
        # W = P[omega, omega] Sigma[omega, :]; m = W^T z equals sigma^-2 R b
        W = linalg.cho_solve(factor.cho, Sigma[omega, :], check_finite=False)
        mean = W.T @ z
        cov = Sigma - _symmetrize(Sigma[:, omega] @ W)
        return RowPosterior(mean=mean, cov=cov)

    def row_loglik(self, row_values: np.ndarray, omega: np.ndarray) -> float:
        omega, z = _canonical_row(row_values, omega, self.params.q)
        if omega.size == 0:
            return 0.0
        factor = self.factorize(omega)
        quad = float(z @ linalg.cho_solve(factor.cho, z, check_finite=False))
        return -0.5 * (omega.size * LOG_2PI + factor.logdet + quad)

    def expectation(self, data: ObservedMatrix, with_moments: bool = True, workers: int = 1) -> EStepStats:
        """One pass over all rows: posterior moments (optional) and log p(Y_Omega | theta)."""
        if data.q != self.params.q:
            raise InvalidInputError(f"Data has q={data.q} columns but Sigma is {self.params.q}x{self.params.q}")

        patterns = data.row_patterns()
        logger.debug("E-pass over %d rows in %d observation patterns", data.p, len(patterns))

        def run(pattern):
            return self._pattern_moments(data, pattern[0], pattern[1], with_moments)

        if workers > 1 and len(patterns) > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                results: List[PatternMoments] = list(executor.map(run, patterns))
        else:
            results = [run(pattern) for pattern in patterns]

        p, q = data.shape
        row_loglik = np.zeros(p)
        M = np.zeros((p, q)) if with_moments else None
        R_diag = np.zeros((p, q)) if with_moments else None
        R_sum = np.zeros((q, q)) if with_moments else None

        for moments in results:
            row_loglik[moments.rows] = moments.loglik
            if with_moments:
                M[moments.rows] = moments.means
                R_diag[moments.rows] = np.diag(moments.cov)
                R_sum += moments.rows.size * moments.cov

        return EStepStats(M=M, R_diag=R_diag, R_sum=R_sum, loglik=float(np.sum(row_loglik)))

    def _pattern_moments(
        self, data: ObservedMatrix, omega: np.ndarray, rows: np.ndarray, with_moments: bool
    ) -> PatternMoments:
        Sigma = self.params.Sigma
        n, k = rows.size, omega.size
        if k == 0:
            means = np.zeros((n, self.params.q)) if with_moments else None
            return PatternMoments(rows=rows, means=means, cov=Sigma, loglik=np.zeros(n))

        factor = self.factorize(omega)
        starts = data.row_offsets[rows]
        Z = data.values[starts[:, None] + np.arange(k)]

        solved = linalg.cho_solve(factor.cho, Z.T, check_finite=False)
        quad = np.sum(Z.T * solved, axis=0)
        loglik = -0.5 * (k * LOG_2PI + factor.logdet + quad)

        if not with_moments:
            return PatternMoments(rows=rows, means=None, cov=None, loglik=loglik)

        W = linalg.cho_solve(factor.cho, Sigma[omega, :], check_finite=False)
        means = Z @ W
        cov = Sigma - _symmetrize(Sigma[:, omega] @ W)
        return PatternMoments(rows=rows, means=means, cov=cov, loglik=loglik)


def _symmetrize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def _canonical_row(row_values, omega, q: int) -> Tuple[np.ndarray, np.ndarray]:
    omega = np.asarray(omega, dtype=np.int64).ravel()
    z = np.asarray(row_values, dtype=np.float64).ravel()
    if omega.shape != z.shape:
        raise InvalidInputError("row_values must have one value per observed index")
    if omega.size and (omega.min() < 0 or omega.max() >= q):
        raise InvalidInputError(f"Observed index out of range for q={q}")
    if np.unique(omega).size != omega.size:
        raise InvalidInputError("Observed indices must be distinct")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("row_values must be finite")
    order = np.argsort(omega, kind="stable")
    return omega[order], z[order]


def row_posterior(row_values: np.ndarray, omega: np.ndarray, params: Hyperparameters) -> RowPosterior:
    """Posterior (m_hat, R) of a row observed at indices omega with values row_values."""
    return PosteriorService(params).row_posterior(row_values, omega)


def observed_loglik(data: ObservedMatrix, params: Hyperparameters, workers: int = 1) -> float:
    return PosteriorService(params).expectation(data, with_moments=False, workers=workers).loglik
