"""
Signal and path CSV files.

Input signals are either one value per line (uniform samples on [0, 1]) or
two comma-separated columns `x,value` with strictly increasing x, mapped
affinely onto [0, 1]. Blank lines and lines starting with '#' are skipped.
"""
import logging
from pathlib import Path as FilePath
from typing import Iterable, List, Sequence, Union

import numpy as np

from core.grid import HVError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 5
CSV_FORMAT = "%.17g"

PathLike = Union[str, FilePath]


class SignalFormatError(HVError):
    """Malformed signal file; `line` is 1-based when a single row is at fault."""

    def __init__(self, source: str, message: str, line: int = None):
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


def _parse_rows(text: str, source: str) -> List[List[float]]:
    rows: List[List[float]] = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) not in (1, 2):
            raise SignalFormatError(source, f"expected 1 or 2 columns, found {len(cells)}", lineno)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise SignalFormatError(source, f"expected {width} column(s), found {len(cells)}", lineno)
        try:
            values = [float(c) for c in cells]
        except ValueError as e:
            raise SignalFormatError(source, f"non-numeric value ({e})", lineno) from e
        if not np.all(np.isfinite(values)):
            raise SignalFormatError(source, "non-finite value", lineno)
        rows.append(values)
    return rows


def parse_signal(text: str, target_nx: int, source: str = "<signal>") -> np.ndarray:
    """Parse signal text and resample it onto target_nx + 1 uniform nodes."""
    rows = _parse_rows(text, source)
    if len(rows) < MIN_SAMPLES:
        raise SignalFormatError(source, f"need at least {MIN_SAMPLES} samples, found {len(rows)}")

    data = np.asarray(rows, dtype=np.float64)
    if data.shape[1] == 1:
        values = data[:, 0]
        x = np.linspace(0.0, 1.0, values.size)
    else:
        raw_x, values = data[:, 0], data[:, 1]
        steps = np.diff(raw_x)
        if np.any(steps <= 0):
            bad = int(np.argmax(steps <= 0)) + 1
            raise SignalFormatError(source, f"x must be strictly increasing (sample {bad + 1})")
        x = (raw_x - raw_x[0]) / (raw_x[-1] - raw_x[0])

    target = np.linspace(0.0, 1.0, target_nx + 1)
    if x.size == target.size and np.array_equal(x, target):
        return values.copy()
    return np.interp(target, x, values)


def load_signal(path: PathLike, target_nx: int) -> np.ndarray:
    source = str(path)
    try:
        text = FilePath(path).read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"❌ cannot read signal {source}: {e}")
        raise
    signal = parse_signal(text, target_nx, source)
    logger.info(f"loaded {source}: {signal.size} node(s)")
    return signal


def native_length(path: PathLike) -> int:
    """Number of samples in a signal file, before resampling."""
    return len(_parse_rows(FilePath(path).read_text(encoding="utf-8"), str(path)))


def write_signal(path: PathLike, signal: Sequence[float], x: Sequence[float] = None):
    values = np.asarray(signal, dtype=np.float64)
    if x is None:
        np.savetxt(path, values, fmt=CSV_FORMAT, delimiter=",")
    else:
        np.savetxt(path, np.column_stack([np.asarray(x, dtype=np.float64), values]),
                   fmt=CSV_FORMAT, delimiter=",")


def write_field(path: PathLike, values: np.ndarray):
    """One row per time slice, comma-separated."""
    np.savetxt(path, np.atleast_2d(values), fmt=CSV_FORMAT, delimiter=",")


def write_frames(path: PathLike, times: Iterable[float], frames: np.ndarray):
    """Rows `t, f(x_0), ..., f(x_nx)`."""
    times = np.asarray(list(times), dtype=np.float64)
    np.savetxt(path, np.column_stack([times, np.atleast_2d(frames)]), fmt=CSV_FORMAT, delimiter=",")


def read_matrix(path: PathLike) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))
