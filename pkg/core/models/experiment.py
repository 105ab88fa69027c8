# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Union

from core.exceptions import InvalidInputError


class Algorithm(str, Enum):
    EB = "eb"
    SOFT_IMPUTE = "soft_impute"
    EFRON_MORRIS = "efron_morris"

    @classmethod
    def parse(cls, value: Union[str, "Algorithm"]) -> "Algorithm":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            choices = ", ".join(a.value for a in cls)
            raise InvalidInputError(f"Unknown algorithm '{value}' (choose from {choices})") from None


class SweepAxis(str, Enum):
    P_LONG = "p_long"
    P_SQUARE = "p_square"
    RANK = "rank"
    FILL = "fill"
    NOISE = "noise"
    SIGMA0 = "sigma0"

    @classmethod
    def parse(cls, value: Union[str, "SweepAxis"]) -> "SweepAxis":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            choices = ", ".join(a.value for a in cls)
            raise InvalidInputError(f"Unknown sweep axis '{value}' (choose from {choices})") from None


@dataclass(frozen=True)
class ExperimentSpec:
    """One synthetic configuration. Defaults are the standard benchmark setting."""

    p: int = 1000
    q: int = 100
    r: int = 10
    sigma_sq: float = 1.0
    fill: float = 0.5
    seed: int = 0
    algorithm: Algorithm = Algorithm.EB
    replicates: int = 10
    # None means "start EB at the true noise variance"
    sigma0_sq: Optional[Union[float, str]] = None

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm.parse(self.algorithm))
        if self.p < 1 or self.q < 1:
            raise InvalidInputError(f"p and q must be positive, got {self.p}x{self.q}")
        if not 1 <= self.r <= min(self.p, self.q):
            raise InvalidInputError(f"r must lie in [1, min(p, q)], got {self.r}")
        if self.sigma_sq < 0:
            raise InvalidInputError(f"sigma_sq must be nonnegative, got {self.sigma_sq}")
        if not 0 < self.fill <= 1:
            raise InvalidInputError(f"fill must lie in (0, 1], got {self.fill}")
        if round(self.fill * self.p * self.q) < 1:
            raise InvalidInputError("fill * p * q must be at least 1")
        if self.replicates < 1:
            raise InvalidInputError(f"replicates must be at least 1, got {self.replicates}")

    @property
    def n_observed(self) -> int:
        return int(round(self.fill * self.p * self.q))

    def replace(self, **changes) -> "ExperimentSpec":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ReplicateResult:
    seed: int
    error1: float
    error2: float
    wall_time_s: float
    iterations: int


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    error1: float
    error2: float
    wall_time_s: float
    iterations: float
    replicates: List[ReplicateResult] = field(default_factory=list)


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    algorithm: Algorithm
    mean_error1: float
    mean_error2: float
    mean_time_s: float
    n_replicates: int
    error: Optional[str] = None
    result: Optional[ExperimentResult] = None
