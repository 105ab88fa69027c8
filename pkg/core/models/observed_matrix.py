# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Tuple

import numpy as np

from core.exceptions import InvalidInputError


@dataclass(frozen=True, eq=False)
class ObservedMatrix:
    """Partially observed p x q matrix Y_Omega stored as 0-based (row, col, value) triples.

    Entries are kept in canonical row-major order, so every reduction over
    them is independent of the order the caller supplied them in.
    """

    p: int
    q: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if int(self.p) < 1 or int(self.q) < 1:
            raise InvalidInputError(f"Matrix dimensions must be positive, got {self.p}x{self.q}")

        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()

        if not (rows.shape == cols.shape == values.shape):
            raise InvalidInputError("rows, cols and values must have the same length")
        if rows.size and (rows.min() < 0 or rows.max() >= self.p):
            raise InvalidInputError(f"Row index out of range for p={self.p}")
        if cols.size and (cols.min() < 0 or cols.max() >= self.q):
            raise InvalidInputError(f"Column index out of range for q={self.q}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("Observed values must be finite")

        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if rows.size > 1:
            same = (np.diff(rows) == 0) & (np.diff(cols) == 0)
            if np.any(same):
                k = int(np.argmax(same))
                raise InvalidInputError(f"Duplicate entry at ({rows[k]}, {cols[k]})")

        for array in (rows, cols, values):
            array.setflags(write=False)

        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_entries(cls, p: int, q: int, entries: Iterable[Tuple[int, int, float]]) -> "ObservedMatrix":
        entries = list(entries)
        if not entries:
            return cls(p, q, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
        rows, cols, values = zip(*entries)
        return cls(p, q, np.array(rows), np.array(cols), np.array(values, dtype=np.float64))

    @classmethod
    def from_dense(cls, Y: np.ndarray, mask: Optional[np.ndarray] = None) -> "ObservedMatrix":
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim != 2:
            raise InvalidInputError("Dense input must be a 2-D array")
        if mask is None:
            mask = np.ones(Y.shape, dtype=bool)
        rows, cols = np.nonzero(np.asarray(mask, dtype=bool))
        return cls(Y.shape[0], Y.shape[1], rows, cols, Y[rows, cols])

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.p, self.q

    @property
    def fill_fraction(self) -> float:
        return self.size / (self.p * self.q)

    @cached_property
    def row_offsets(self) -> np.ndarray:
        counts = np.bincount(self.rows, minlength=self.p)
        return np.concatenate(([0], np.cumsum(counts)))

    @cached_property
    def row_index_sets(self) -> List[np.ndarray]:
        """Omega_i for every row, sorted ascending."""
        offsets = self.row_offsets
        return [self.cols[offsets[i]:offsets[i + 1]] for i in range(self.p)]

    def row_values(self, i: int) -> np.ndarray:
        offsets = self.row_offsets
        return self.values[offsets[i]:offsets[i + 1]]

    def row_patterns(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Rows grouped by identical Omega_i, as (omega, row_indices) in ascending first-row order."""
        groups = {}
        omegas = {}
        for i, omega in enumerate(self.row_index_sets):
            key = omega.tobytes()
            if key not in groups:
                groups[key] = []
                omegas[key] = omega
            groups[key].append(i)
        return [(omegas[key], np.asarray(rows, dtype=np.int64)) for key, rows in groups.items()]

    def mask(self) -> np.ndarray:
        out = np.zeros((self.p, self.q), dtype=bool)
        out[self.rows, self.cols] = True
        return out

    def to_dense(self, fill_value: float = 0.0) -> np.ndarray:
        out = np.full((self.p, self.q), fill_value, dtype=np.float64)
        out[self.rows, self.cols] = self.values
        return out

    def transpose(self) -> "ObservedMatrix":
        return ObservedMatrix(self.q, self.p, self.cols, self.rows, self.values)

    def subset(self, indices: np.ndarray) -> "ObservedMatrix":
        """Entries at the given positions of the canonical entry list, same p and q."""
        indices = np.asarray(indices, dtype=np.int64)
        return ObservedMatrix(self.p, self.q, self.rows[indices], self.cols[indices], self.values[indices])

    def entries(self) -> List[Tuple[int, int, float]]:
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ObservedMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None
