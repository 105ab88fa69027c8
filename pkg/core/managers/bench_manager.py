# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.exceptions import InvalidInputError, MatrixCompletionError
from core.managers.completion_manager import CompletionManager
from core.models.configs import AUTO, EmConfig, SoftImputeConfig
from core.models.experiment import (
    Algorithm,
    ExperimentResult,
    ExperimentSpec,
    ReplicateResult,
    SweepAxis,
    SweepRow,
)
from core.models.observed_matrix import ObservedMatrix
from core.services.metrics_service import error1, error2

logger = logging.getLogger(__name__)


def gen_instance(spec: ExperimentSpec) -> Tuple[np.ndarray, ObservedMatrix]:
    """Draw M = UV, Y = M + E and a uniform Omega of size round(fill * p * q).

    Stream order from one seeded generator: U, V, E (row-major), then the Omega sample.
    The noise block is drawn even when sigma_sq = 0 so the Omega sample does not shift.
    """
    rng = np.random.default_rng(spec.seed)
    U = rng.standard_normal((spec.p, spec.r))
    V = rng.standard_normal((spec.r, spec.q))
    M = U @ V
    E = math.sqrt(spec.sigma_sq) * rng.standard_normal((spec.p, spec.q))
    Y = M + E

    flat = np.sort(rng.choice(spec.p * spec.q, size=spec.n_observed, replace=False))
    data = ObservedMatrix(spec.p, spec.q, flat // spec.q, flat % spec.q, Y.ravel()[flat])
    return M, data


def apply_axis(base: ExperimentSpec, axis: Union[str, SweepAxis], value: float) -> ExperimentSpec:
    axis = SweepAxis.parse(axis)
    if axis == SweepAxis.P_LONG:
        return base.replace(p=int(value))
    if axis == SweepAxis.P_SQUARE:
        return base.replace(p=int(value), q=int(value))
    if axis == SweepAxis.RANK:
        return base.replace(r=int(value))
    if axis == SweepAxis.FILL:
        return base.replace(fill=float(value))
    if axis == SweepAxis.NOISE:
        return base.replace(sigma_sq=float(value))
    return base.replace(sigma0_sq=float(value))


class BenchManager:
    """Synthetic experiments: replicated runs of one configuration and one-axis sweeps."""

    def __init__(
        self,
        em_config: Optional[EmConfig] = None,
        soft_impute_config: Optional[SoftImputeConfig] = None,
        workers: int = 1,
    ):
        self.em_config = em_config or EmConfig()
        self.soft_impute_config = soft_impute_config or SoftImputeConfig()
        self.workers = max(1, int(workers))

    def run_experiment(self, spec: ExperimentSpec) -> ExperimentResult:
        replicates: List[ReplicateResult] = []
        for offset in range(spec.replicates):
            seed = spec.seed + offset
            M_true, data = gen_instance(spec.replace(seed=seed))
            manager = self._completion_manager(spec, seed)
            outcome = manager.complete(data, spec.algorithm, noise_var=spec.sigma_sq or None)

            fully_observed = data.size == data.p * data.q
            replicates.append(ReplicateResult(
                seed=seed,
                error1=error1(outcome.M_hat, M_true),
                error2=float("nan") if fully_observed else error2(outcome.M_hat, M_true, data.mask()),
                wall_time_s=outcome.wall_time_s,
                iterations=outcome.iterations,
            ))

        return ExperimentResult(
            spec=spec,
            error1=float(np.mean([r.error1 for r in replicates])),
            error2=float(np.mean([r.error2 for r in replicates])),
            wall_time_s=float(np.mean([r.wall_time_s for r in replicates])),
            iterations=float(np.mean([r.iterations for r in replicates])),
            replicates=replicates,
        )

    def run_sweep(
        self,
        axis: Union[str, SweepAxis],
        grid: Sequence[float],
        base_spec: Optional[ExperimentSpec] = None,
        algorithms: Sequence[Union[str, Algorithm]] = (Algorithm.EB,),
        on_cell: Optional[Callable[[SweepRow], None]] = None,
    ) -> List[SweepRow]:
        axis = SweepAxis.parse(axis)
        grid = list(grid)
        algorithms = [Algorithm.parse(a) for a in algorithms]
        if not grid:
            raise InvalidInputError("Sweep grid must contain at least one value")
        if not algorithms:
            raise InvalidInputError("At least one algorithm is required")

        base_spec = base_spec or ExperimentSpec()
        # out-of-range grid values fail here, before any cell runs
        specs = [apply_axis(base_spec, axis, value) for value in grid]
        cells = [(value, spec, algorithm) for value, spec in zip(grid, specs) for algorithm in algorithms]
        logger.info("Sweep over %s: %d values x %d algorithms", axis.value, len(grid), len(algorithms))

        def run(cell):
            return self._run_cell(axis, *cell)

        if self.workers > 1 and len(cells) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                rows = list(executor.map(run, cells))
        else:
            rows = [run(cell) for cell in cells]

        if on_cell is not None:
            for row in rows:
                on_cell(row)
        return rows

    def _run_cell(self, axis: SweepAxis, value: float, spec: ExperimentSpec, algorithm: Algorithm) -> SweepRow:
        try:
            result = self.run_experiment(spec.replace(algorithm=algorithm))
        except MatrixCompletionError as e:
            logger.warning("Cell %s=%s %s failed: %s", axis.value, value, algorithm.value, e)
            nan = float("nan")
            return SweepRow(value, algorithm, nan, nan, nan, 0, error=str(e))

        logger.info(
            "%s=%s %s: error1=%.4f error2=%.4f time=%.3fs",
            axis.value, value, algorithm.value, result.error1, result.error2, result.wall_time_s,
        )
        return SweepRow(
            axis_value=value,
            algorithm=algorithm,
            mean_error1=result.error1,
            mean_error2=result.error2,
            mean_time_s=result.wall_time_s,
            n_replicates=len(result.replicates),
            result=result,
        )

    def _completion_manager(self, spec: ExperimentSpec, seed: int) -> CompletionManager:
        if spec.sigma0_sq is not None:
            sigma0_sq = spec.sigma0_sq
        else:
            sigma0_sq = spec.sigma_sq if spec.sigma_sq > 0 else AUTO
        return CompletionManager(
            em_config=self.em_config.replace(sigma0_sq=sigma0_sq),
            soft_impute_config=self.soft_impute_config.replace(rng_seed=seed),
        )


def summarize(rows: Sequence[SweepRow]) -> Dict[str, int]:
    stats = {"cells": len(rows), "failed": 0, "replicates": 0}
    for row in rows:
        if row.error is not None:
            stats["failed"] += 1
        stats["replicates"] += row.n_replicates
    return stats
