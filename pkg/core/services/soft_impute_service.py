# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from core.exceptions import InvalidInputError
from core.models.configs import SoftImputeConfig
from core.models.observed_matrix import ObservedMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SoftImputeFit:
    M_hat: np.ndarray
    lam: float
    iterations: int


def svt(Z: np.ndarray, lam: float) -> np.ndarray:
    """Singular value soft-thresholding, the proximal operator of lam * nuclear norm."""
    U, s, Vt = linalg.svd(Z, full_matrices=False, lapack_driver="gesdd")
    s = np.maximum(s - lam, 0.0)
    keep = s > 0
    return (U[:, keep] * s[keep]) @ Vt[keep]


def penalized_objective(data: ObservedMatrix, M: np.ndarray, lam: float) -> float:
    residual = data.values - M[data.rows, data.cols]
    return 0.5 * float(residual @ residual) + lam * float(np.sum(linalg.svdvals(M)))


def soft_impute(
    data: ObservedMatrix,
    lam: float,
    tol: float = 1e-4,
    max_iters: int = 100,
    warm_start: Optional[np.ndarray] = None,
) -> SoftImputeFit:
    """Iterate M <- SVT_lam(P_Omega(Y) + P_Omega^perp(M)) until the relative change drops below tol."""
    if data.size == 0:
        raise InvalidInputError("soft_impute needs at least one observed entry")
    if lam < 0:
        raise InvalidInputError(f"lambda must be nonnegative, got {lam}")

    mask = data.mask()
    # with every entry observed the update ignores M, so its first result is the fixed point
    fully_observed = bool(mask.all())
    observed = data.to_dense()
    M = np.zeros(data.shape) if warm_start is None else np.array(warm_start, dtype=np.float64)

    iterations = 0
    for iterations in range(1, max_iters + 1):
        M_new = svt(np.where(mask, observed, M), lam)
        denominator = float(np.sum(M * M))
        diff = M_new - M
        change = float(np.sum(diff * diff))
        M = M_new
        if fully_observed:
            break
        if denominator == 0.0:
            if change == 0.0:
                break
            continue
        if change / denominator < tol:
            break

    return SoftImputeFit(M_hat=M, lam=float(lam), iterations=iterations)


def lambda_grid(data: ObservedMatrix, size: int) -> np.ndarray:
    """size values log-spaced from sigma_1 down to sigma_1 / 1000 of the zero-filled matrix."""
    sigma1 = float(linalg.svdvals(data.to_dense())[0])
    if sigma1 == 0.0:
        return np.zeros(1)
    return np.geomspace(sigma1, sigma1 / 1e3, num=size)


def split_observed(data: ObservedMatrix, validation_fraction: float, seed: int) -> Tuple[ObservedMatrix, ObservedMatrix]:
    rng = np.random.default_rng(seed)
    n_validation = int(round(data.size * validation_fraction / 100.0))
    n_train = data.size - n_validation
    if n_validation < 1 or n_train < 1:
        raise InvalidInputError(
            f"Cannot split {data.size} observed entries into train/validation at {validation_fraction}%"
        )
    permutation = rng.permutation(data.size)
    return data.subset(np.sort(permutation[:n_train])), data.subset(np.sort(permutation[n_train:]))


def cv_select_lambda(data: ObservedMatrix, config: Optional[SoftImputeConfig] = None) -> Tuple[float, np.ndarray]:
    """Pick lambda by held-out squared error over a log grid, then refit on all of Omega."""
    config = config or SoftImputeConfig()
    train, validation = split_observed(data, config.validation_fraction, config.rng_seed)
    grid = lambda_grid(train, config.grid_size)

    scores: List[float] = []
    fits: List[SoftImputeFit] = []
    warm = None
    for lam in grid:
        result = soft_impute(train, lam, config.tol, config.max_iters, warm_start=warm)
        warm = result.M_hat
        residual = validation.values - result.M_hat[validation.rows, validation.cols]
        scores.append(float(residual @ residual))
        fits.append(result)
        logger.debug("lambda=%.6g validation_sse=%.6g iterations=%d", lam, scores[-1], result.iterations)

    best = int(np.argmin(scores))
    lam_best = float(grid[best])
    logger.info("Selected lambda=%.6g (%d of %d candidates)", lam_best, best + 1, len(grid))

    final = soft_impute(data, lam_best, config.tol, config.max_iters, warm_start=fits[best].M_hat)
    return lam_best, final.M_hat
