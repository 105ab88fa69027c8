# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import dataclasses
from dataclasses import dataclass
from typing import Any, Mapping, Union

from core.exceptions import InvalidInputError

AUTO = "auto"


class _ConfigMixin:
    @classmethod
    def from_dict(cls, mapping: Mapping[str, Any]):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise InvalidInputError(f"Unknown {cls.__name__} keys: {', '.join(sorted(unknown))}")
        return cls(**{key: value for key, value in mapping.items() if value is not None})

    def replace(self, **changes):
        return dataclasses.replace(self, **{key: value for key, value in changes.items() if value is not None})


@dataclass(frozen=True)
class EmConfig(_ConfigMixin):
    """Inputs of the EB algorithm: initial noise variance and the two tolerances."""

    sigma0_sq: Union[float, str] = AUTO
    eps1: float = 1e-3
    eps2: float = 1e-4
    max_iters: int = 500
    jitter: float = 1e-6
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.sigma0_sq, str):
            if self.sigma0_sq != AUTO:
                raise InvalidInputError(f"sigma0_sq must be a positive number or '{AUTO}'")
        elif not float(self.sigma0_sq) > 0:
            raise InvalidInputError(f"sigma0_sq must be positive, got {self.sigma0_sq}")
        if not self.eps1 > 0:
            raise InvalidInputError(f"eps1 must be positive, got {self.eps1}")
        if not self.eps2 > 0:
            raise InvalidInputError(f"eps2 must be positive, got {self.eps2}")
        if int(self.max_iters) < 1:
            raise InvalidInputError(f"max_iters must be at least 1, got {self.max_iters}")
        if not self.jitter >= 0:
            raise InvalidInputError(f"jitter must be nonnegative, got {self.jitter}")
        if int(self.workers) < 1:
            raise InvalidInputError(f"workers must be at least 1, got {self.workers}")


@dataclass(frozen=True)
class SoftImputeConfig(_ConfigMixin):
    grid_size: int = 20
    validation_fraction: float = 20.0
    tol: float = 1e-4
    max_iters: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.grid_size) < 1:
            raise InvalidInputError(f"grid_size must be at least 1, got {self.grid_size}")
        if not 0 < self.validation_fraction < 100:
            raise InvalidInputError(
                f"validation_fraction must be a percentage in (0, 100), got {self.validation_fraction}"
            )
        if not self.tol > 0:
            raise InvalidInputError(f"tol must be positive, got {self.tol}")
        if int(self.max_iters) < 1:
            raise InvalidInputError(f"max_iters must be at least 1, got {self.max_iters}")
