# Copyright (©) 2026, Alexander Suvorov. All rights reserved.
import logging
import os
import tempfile
import warnings
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from core.exceptions import InvalidFlagsError, ParseError
from core.models.experiment import SweepRow
from core.models.observed_matrix import ObservedMatrix

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRIPLE_HEADER = "row,col,value"
CELL_HEADER = "row,col"
SWEEP_COLUMNS = ["axis_value", "algorithm", "mean_error1", "mean_error2", "mean_time_s", "n_replicates"]
MAX_DENSE_CELLS = 10 ** 7


class StorageService:
    """Flat-file I/O: 1-based triple files on disk, 0-based ObservedMatrix in memory."""

    def __init__(self, max_dense_cells: int = MAX_DENSE_CELLS):
        self.max_dense_cells = max_dense_cells

    def read_triples(self, path: PathLike, p: Optional[int] = None, q: Optional[int] = None) -> ObservedMatrix:
        frame = self._read_frame(path, TRIPLE_HEADER, {"row": "int64", "col": "int64", "value": "float64"})

        values = frame["value"].to_numpy()
        if not np.all(np.isfinite(values)):
            raise ParseError(f"{path}: values must be finite decimals")

        duplicated = frame.duplicated(["row", "col"])
        if duplicated.any():
            first = frame[duplicated].iloc[0]
            raise ParseError(f"{path}: duplicate entry ({first['row']}, {first['col']})")

        rows, cols = self._indices(frame, path)
        p = self._dimension(p, rows, "rows", path)
        q = self._dimension(q, cols, "columns", path)
        return ObservedMatrix(p, q, rows - 1, cols - 1, values)

    def read_cells(self, path: PathLike, p: int, q: int) -> Tuple[np.ndarray, np.ndarray]:
        """A prediction request list (header row,col); returns 0-based indices in file order."""
        frame = self._read_frame(path, CELL_HEADER, {"row": "int64", "col": "int64"})
        rows, cols = self._indices(frame, path)
        if rows.max() > p or cols.max() > q:
            raise ParseError(f"{path}: requested cell outside the {p}x{q} matrix")
        return rows - 1, cols - 1

    def write_triples(self, path: PathLike, data: ObservedMatrix) -> Dict[str, Any]:
        frame = pd.DataFrame({
            "row": data.rows + 1,
            "col": data.cols + 1,
            "value": [repr(v) for v in data.values.tolist()],
        })
        return self._atomic_write(path, lambda fh: frame.to_csv(fh, index=False, lineterminator="\n"))

    def write_dense(self, path: PathLike, M: np.ndarray) -> Dict[str, Any]:
        if M.size > self.max_dense_cells:
            raise InvalidFlagsError(
                f"Dense output of {M.size} cells exceeds the {self.max_dense_cells} cap; use --predict"
            )
        frame = pd.DataFrame(M)
        return self._atomic_write(
            path, lambda fh: frame.to_csv(fh, header=False, index=False, float_format="%.17g", lineterminator="\n")
        )

    def write_predictions(self, path: PathLike, M: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> Dict[str, Any]:
        frame = pd.DataFrame({
            "row": rows + 1,
            "col": cols + 1,
            "value": [repr(v) for v in M[rows, cols].tolist()],
        })
        return self._atomic_write(path, lambda fh: frame.to_csv(fh, index=False, lineterminator="\n"))

    def write_report(self, path: PathLike, info: Mapping[str, Any]) -> Dict[str, Any]:
        lines = [f"{key}={_format_value(value)}\n" for key, value in info.items()]
        return self._atomic_write(path, lambda fh: fh.writelines(lines))

    def write_sweep(self, path: PathLike, rows: Sequence[SweepRow]) -> Dict[str, Any]:
        frame = sweep_frame(rows)
        return self._atomic_write(path, lambda fh: frame.to_csv(fh, index=False, lineterminator="\n"))

    def _read_frame(self, path: PathLike, header: str, dtypes: Dict[str, str]) -> pd.DataFrame:
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8", newline="") as fh:
                first_line = fh.readline()
        except (OSError, UnicodeDecodeError) as e:
            raise ParseError(f"{path}: cannot read file ({e})") from e

        if not first_line:
            raise ParseError(f"{path}: file is empty")
        if first_line.rstrip("\r\n") != header:
            raise ParseError(f"{path}: expected header '{header}', got '{first_line.rstrip()}'")

        try:
            with warnings.catch_warnings():
                # a data line wider than the header is reported as a ParserWarning
                warnings.simplefilter("error", pd.errors.ParserWarning)
                frame = pd.read_csv(
                    path,
                    dtype=dtypes,
                    index_col=False,
                    on_bad_lines="error",
                    float_precision="round_trip",
                    encoding="utf-8",
                )
        except (ValueError, TypeError, pd.errors.ParserError, pd.errors.ParserWarning, pd.errors.EmptyDataError) as e:
            raise ParseError(f"{path}: malformed line ({e})") from e

        if list(frame.columns) != header.split(","):
            raise ParseError(f"{path}: unexpected columns {list(frame.columns)}")
        if frame.empty:
            raise ParseError(f"{path}: no entries after the header")
        return frame

    @staticmethod
    def _indices(frame: pd.DataFrame, path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
        rows = frame["row"].to_numpy(dtype=np.int64)
        cols = frame["col"].to_numpy(dtype=np.int64)
        if rows.min() < 1 or cols.min() < 1:
            raise ParseError(f"{path}: indices are 1-based and must be at least 1")
        return rows, cols

    @staticmethod
    def _dimension(given: Optional[int], indices: np.ndarray, name: str, path: PathLike) -> int:
        largest = int(indices.max())
        if given is None:
            return largest
        if given < largest:
            raise ParseError(f"{path}: index {largest} exceeds the declared {given} {name}")
        return int(given)

    @staticmethod
    def _atomic_write(path: PathLike, writer: Callable[[TextIO], Any]) -> Dict[str, Any]:
        path = Path(path)
        directory = path.parent if str(path.parent) else Path(".")
        directory.mkdir(parents=True, exist_ok=True)

        fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                writer(fh)
            os.replace(temp_name, path)
        except BaseException:
            Path(temp_name).unlink(missing_ok=True)
            raise

        size_bytes = path.stat().st_size
        logger.debug("Wrote %s (%d bytes)", path, size_bytes)
        return {"path": str(path), "size_bytes": size_bytes}


def sweep_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            [row.axis_value, row.algorithm.value, row.mean_error1, row.mean_error2, row.mean_time_s, row.n_replicates]
            for row in rows
        ],
        columns=SWEEP_COLUMNS,
    )


def _format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(_format_value(float(v)) for v in value)
    return str(value)
