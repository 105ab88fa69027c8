# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from core.exceptions import InvalidFlagsError
from core.managers.completion_manager import CompletionManager, CompletionOutcome
from core.models.experiment import Algorithm
from core.models.observed_matrix import ObservedMatrix
from core.services.metrics_service import holdout_error

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HoldoutResult:
    error: float
    train: ObservedMatrix
    heldout: ObservedMatrix
    outcome: CompletionOutcome

    def summary(self) -> Dict[str, Any]:
        info = self.outcome.summary()
        info.pop("loglik_trace", None)
        info.update({
            "error": self.error,
            "n_train": self.train.size,
            "n_holdout": self.heldout.size,
            "wall_time_s": self.outcome.wall_time_s,
        })
        return info


class HoldoutManager:
    """Fit on a random sample of the observed entries, score on the rest."""

    def __init__(self, completion_manager: Optional[CompletionManager] = None):
        self.completion_manager = completion_manager or CompletionManager()

    @staticmethod
    def split(data: ObservedMatrix, sample_size: int, seed: int) -> Tuple[ObservedMatrix, ObservedMatrix]:
        if not 1 <= sample_size < data.size:
            raise InvalidFlagsError(
                f"--sample-size must lie in [1, {data.size - 1}] for {data.size} observed entries, got {sample_size}"
            )
        rng = np.random.default_rng(seed)
        chosen = np.zeros(data.size, dtype=bool)
        chosen[rng.choice(data.size, size=sample_size, replace=False)] = True
        return data.subset(np.flatnonzero(chosen)), data.subset(np.flatnonzero(~chosen))

    def evaluate(
        self,
        data: ObservedMatrix,
        sample_size: int,
        seed: int = 0,
        algorithm: Union[str, Algorithm] = Algorithm.EB,
    ) -> HoldoutResult:
        train, heldout = self.split(data, sample_size, seed)
        logger.info("Holdout split: %d training, %d held-out entries", train.size, heldout.size)

        outcome = self.completion_manager.complete(train, algorithm)
        error = holdout_error(outcome.M_hat, heldout)
        logger.info("Holdout error %.4f (%s, %.2fs)", error, outcome.algorithm.value, outcome.wall_time_s)
        return HoldoutResult(error=error, train=train, heldout=heldout, outcome=outcome)
