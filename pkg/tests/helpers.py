# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import numpy as np

from core.models.hyperparameters import Hyperparameters
from core.models.observed_matrix import ObservedMatrix


def random_pd(rng: np.random.Generator, q: int, floor: float = 0.1) -> np.ndarray:
    A = rng.standard_normal((q, q))
    return A @ A.T + floor * np.eye(q)


def model_instance(rng: np.random.Generator, p: int, q: int, fill: float, sigma_sq: float = 1.0):
    """Rows m_i ~ N(0, Sigma), Y = M + noise, observed on a random mask with at least one entry."""
    Sigma = random_pd(rng, q)
    M = rng.multivariate_normal(np.zeros(q), Sigma, size=p)
    Y = M + np.sqrt(sigma_sq) * rng.standard_normal((p, q))
    mask = rng.random((p, q)) < fill
    if not mask.any():
        mask[0, 0] = True
    return ObservedMatrix.from_dense(Y, mask), Hyperparameters(Sigma, sigma_sq)


def posterior_oracle(Sigma: np.ndarray, sigma_sq: float, omega: np.ndarray, z: np.ndarray):
    """Direct inversion R = (Sigma^-1 + D / sigma^2)^-1, m = R b / sigma^2."""
    q = Sigma.shape[0]
    D = np.zeros((q, q))
    D[omega, omega] = 1.0
    b = np.zeros(q)
    b[omega] = z
    R = np.linalg.inv(np.linalg.inv(Sigma) + D / sigma_sq)
    return R @ b / sigma_sq, R
