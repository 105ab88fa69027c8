# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
from dataclasses import dataclass, field
from enum import Enum
from typing import List

import numpy as np

from core.models.hyperparameters import Hyperparameters


class StopReason(str, Enum):
    LOGLIK_TOL = "loglik_tol"
    PARAM_TOL = "param_tol"
    MAX_ITERS = "max_iters"
    LOGLIK_DECREASE = "loglik_decrease"


@dataclass(frozen=True, eq=False)
class FitResult:
    M_hat: np.ndarray
    params: Hyperparameters
    trace: List[float]
    stop_reason: StopReason
    transposed: bool = False
    wall_time_s: float = field(default=0.0, compare=False)

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    @property
    def loglik_final(self) -> float:
        return self.trace[-1]
