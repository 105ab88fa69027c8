# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from core.exceptions import InvalidInputError

SYMMETRY_RTOL = 1e-12
PSD_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Hyperparameters:
    """Model parameters theta = (Sigma, sigma^2): rows m_i ~ N(0, Sigma), Y | M ~ N(M, sigma^2 I)."""

    Sigma: np.ndarray
    sigma_sq: float

    def __post_init__(self):
        Sigma = np.array(self.Sigma, dtype=np.float64, ndmin=2)
        if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
            raise InvalidInputError(f"Sigma must be square, got shape {Sigma.shape}")
        if not np.all(np.isfinite(Sigma)):
            raise InvalidInputError("Sigma must be finite")

        scale = max(float(np.max(np.abs(Sigma))), np.finfo(float).tiny)
        if np.max(np.abs(Sigma - Sigma.T)) > SYMMETRY_RTOL * scale:
            raise InvalidInputError("Sigma must be symmetric")

        eigenvalues = linalg.eigvalsh(Sigma)
        if eigenvalues[0] < -PSD_RTOL * max(eigenvalues[-1], 0.0):
            raise InvalidInputError(
                f"Sigma must be positive semidefinite (smallest eigenvalue {eigenvalues[0]:.3e})"
            )

        sigma_sq = float(self.sigma_sq)
        if not np.isfinite(sigma_sq) or sigma_sq <= 0:
            raise InvalidInputError(f"sigma_sq must be positive, got {self.sigma_sq}")

        Sigma.setflags(write=False)
        object.__setattr__(self, "Sigma", Sigma)
        object.__setattr__(self, "sigma_sq", sigma_sq)

    @property
    def q(self) -> int:
        return self.Sigma.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return linalg.eigvalsh(self.Sigma)

    def permuted(self, permutation: np.ndarray) -> "Hyperparameters":
        permutation = np.asarray(permutation)
        return Hyperparameters(self.Sigma[np.ix_(permutation, permutation)], self.sigma_sq)


@dataclass(frozen=True, eq=False)
class RowPosterior:
    """Posterior m_i | Y_Omega ~ N(mean, cov) of one latent row."""

    mean: np.ndarray
    cov: np.ndarray
