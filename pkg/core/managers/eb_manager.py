# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import logging
import time
from typing import Optional, Tuple

import numpy as np

from core.exceptions import ConditioningError, InvalidInputError
from core.models.configs import AUTO, EmConfig
from core.models.fit_result import FitResult, StopReason
from core.models.hyperparameters import Hyperparameters
from core.models.observed_matrix import ObservedMatrix
from core.services.posterior_service import EStepStats, PosteriorService

logger = logging.getLogger(__name__)

SIGMA0_FLOOR = 1e-8
SIGMA_SQ_FLOOR = 1e-12
DECREASE_TOL = 1e-8


class EBSolver:
    """Empirical Bayes matrix completion by EM over (Sigma, sigma^2).

    Each row of M is a priori N(0, Sigma); observations add N(0, sigma^2) noise.
    The E-step takes posterior moments row by row, the M-step refits Sigma and
    sigma^2 in closed form, and the completed matrix is the stack of posterior means.
    """

    def __init__(self, config: Optional[EmConfig] = None):
        self.config = config or EmConfig()

    def initialize(self, data: ObservedMatrix) -> Tuple[np.ndarray, Hyperparameters]:
        if data.size == 0:
            raise InvalidInputError("Cannot fit a matrix with no observed entries")

        M0 = data.to_dense()
        gram = M0.T @ M0 / data.p
        gram = 0.5 * (gram + gram.T)
        jitter = self.config.jitter * max(1.0, float(np.trace(gram)) / data.q)
        Sigma0 = gram + jitter * np.eye(data.q)

        if self.config.sigma0_sq == AUTO:
            variance = float(np.var(data.values, ddof=1)) if data.size > 1 else 0.0
            sigma0_sq = max(variance, SIGMA0_FLOOR)
        else:
            sigma0_sq = float(self.config.sigma0_sq)

        return M0, Hyperparameters(Sigma0, sigma0_sq)

    def em_iterate(
        self, data: ObservedMatrix, params: Hyperparameters
    ) -> Tuple[np.ndarray, Hyperparameters, np.ndarray]:
        """One E-step + M-step. Returns (M_new, params_new, per-row diagonals of R_i)."""
        stats = PosteriorService(params).expectation(data, workers=self.config.workers)
        return self._maximize(data, params, stats)

    def fit(self, data: ObservedMatrix) -> FitResult:
        if data.size == 0:
            raise InvalidInputError("Cannot fit a matrix with no observed entries")

        started = time.perf_counter()
        transposed = data.p < data.q
        work = data.transpose() if transposed else data
        if transposed:
            logger.info("Input is %dx%d with p < q; fitting the transpose", data.p, data.q)

        M_old, params_old = self.initialize(work)
        stats = self._expectation(work, params_old, iteration=0)
        trace = [stats.loglik]
        stop_reason = StopReason.MAX_ITERS

        for iteration in range(1, self.config.max_iters + 1):
            M_new, params_new, _ = self._maximize(work, params_old, stats)
            next_stats = self._expectation(work, params_new, iteration=iteration)

            loglik_old, loglik_new = trace[-1], next_stats.loglik
            if loglik_new < loglik_old - DECREASE_TOL:
                logger.warning(
                    "Log-likelihood decreased at iteration %d (%.10g -> %.10g); keeping the previous iterate",
                    iteration, loglik_old, loglik_new,
                )
                stop_reason = StopReason.LOGLIK_DECREASE
                break

            change = _relative_change(M_new, M_old)
            trace.append(loglik_new)
            logger.info(
                "iteration %d: loglik=%.6f sigma_sq=%.6g change=%s",
                iteration, loglik_new, params_new.sigma_sq,
                "n/a" if change is None else f"{change:.3e}",
            )
            M_old, params_old, stats = M_new, params_new, next_stats

            if loglik_new - loglik_old < self.config.eps1:
                stop_reason = StopReason.LOGLIK_TOL
                break
            if change is not None and change < self.config.eps2:
                stop_reason = StopReason.PARAM_TOL
                break

        elapsed = time.perf_counter() - started
        logger.info("EB stopped after %d iterations (%s) in %.2fs", len(trace) - 1, stop_reason.value, elapsed)

        return FitResult(
            M_hat=M_old.T.copy() if transposed else M_old,
            params=params_old,
            trace=trace,
            stop_reason=stop_reason,
            transposed=transposed,
            wall_time_s=elapsed,
        )

    def _expectation(self, data: ObservedMatrix, params: Hyperparameters, iteration: int) -> EStepStats:
        try:
            return PosteriorService(params).expectation(data, workers=self.config.workers)
        except ConditioningError as e:
            raise ConditioningError(str(e), iteration=iteration) from e

    @staticmethod
    def _maximize(
        data: ObservedMatrix, params: Hyperparameters, stats: EStepStats
    ) -> Tuple[np.ndarray, Hyperparameters, np.ndarray]:
        M = stats.M
        Sigma_new = (M.T @ M + stats.R_sum) / data.p
        Sigma_new = 0.5 * (Sigma_new + Sigma_new.T)

        if data.size:
            residual = data.values - M[data.rows, data.cols]
            spread = stats.R_diag[data.rows, data.cols]
            sigma_sq_new = max((float(residual @ residual) + float(np.sum(spread))) / data.size, SIGMA_SQ_FLOOR)
        else:
            sigma_sq_new = params.sigma_sq

        return M, Hyperparameters(Sigma_new, sigma_sq_new), stats.R_diag


def _relative_change(M_new: np.ndarray, M_old: np.ndarray) -> Optional[float]:
    denominator = float(np.sum(M_old * M_old))
    if denominator == 0.0:
        return None
    diff = M_new - M_old
    return float(np.sum(diff * diff)) / denominator


def initialize(data: ObservedMatrix, config: Optional[EmConfig] = None) -> Tuple[np.ndarray, Hyperparameters]:
    return EBSolver(config).initialize(data)


def em_iterate(data: ObservedMatrix, params: Hyperparameters) -> Tuple[np.ndarray, Hyperparameters, np.ndarray]:
    return EBSolver().em_iterate(data, params)


def fit(data: ObservedMatrix, config: Optional[EmConfig] = None) -> FitResult:
    return EBSolver(config).fit(data)
