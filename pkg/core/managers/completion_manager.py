# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import logging
import math
import time
from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

import numpy as np

from core.exceptions import InvalidInputError
from core.managers.eb_manager import EBSolver
from core.models.configs import EmConfig, SoftImputeConfig
from core.models.experiment import Algorithm
from core.models.fit_result import FitResult
from core.models.observed_matrix import ObservedMatrix
from core.services.shrinkage_service import efron_morris
from core.services.soft_impute_service import cv_select_lambda

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CompletionOutcome:
    algorithm: Algorithm
    M_hat: np.ndarray
    wall_time_s: float
    fit: Optional[FitResult] = None
    lam: Optional[float] = None

    @property
    def iterations(self) -> int:
        return self.fit.iterations if self.fit is not None else 0

    def summary(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {"algorithm": self.algorithm.value}
        if self.fit is not None:
            eigenvalues = self.fit.params.eigenvalues()
            info.update({
                "iterations": self.fit.iterations,
                "stop_reason": self.fit.stop_reason.value,
                "transposed": self.fit.transposed,
                "sigma_sq_hat": self.fit.params.sigma_sq,
                "sigma_eig_min": float(eigenvalues[0]),
                "sigma_eig_max": float(eigenvalues[-1]),
                "sigma_trace": float(np.sum(eigenvalues)),
                "loglik_final": self.fit.loglik_final,
                "loglik_trace": self.fit.trace,
            })
        if self.lam is not None:
            info["lambda"] = self.lam
        return info


class CompletionManager:
    """Runs one completion algorithm on observed data and times the fit call only."""

    def __init__(
        self,
        em_config: Optional[EmConfig] = None,
        soft_impute_config: Optional[SoftImputeConfig] = None,
        positive_part: bool = False,
    ):
        self.em_config = em_config or EmConfig()
        self.soft_impute_config = soft_impute_config or SoftImputeConfig()
        self.positive_part = positive_part

    def complete(
        self,
        data: ObservedMatrix,
        algorithm: Union[str, Algorithm] = Algorithm.EB,
        noise_var: Optional[float] = None,
    ) -> CompletionOutcome:
        algorithm = Algorithm.parse(algorithm)
        started = time.perf_counter()

        if algorithm == Algorithm.EB:
            result = EBSolver(self.em_config).fit(data)
            outcome = CompletionOutcome(algorithm, result.M_hat, time.perf_counter() - started, fit=result)
        elif algorithm == Algorithm.SOFT_IMPUTE:
            lam, M_hat = cv_select_lambda(data, self.soft_impute_config)
            outcome = CompletionOutcome(algorithm, M_hat, time.perf_counter() - started, lam=lam)
        else:
            M_hat = self._efron_morris(data, noise_var)
            outcome = CompletionOutcome(algorithm, M_hat, time.perf_counter() - started)

        logger.info("%s finished in %.3fs", algorithm.value, outcome.wall_time_s)
        return outcome

    def _efron_morris(self, data: ObservedMatrix, noise_var: Optional[float]) -> np.ndarray:
        if data.size != data.p * data.q:
            raise InvalidInputError("efron_morris needs a fully observed matrix")
        # the estimator assumes unit noise; rescale when the noise variance is known
        scale = math.sqrt(noise_var) if noise_var else 1.0
        estimate = efron_morris(data.to_dense() / scale, positive_part=self.positive_part)
        return estimate.to_array() * scale
