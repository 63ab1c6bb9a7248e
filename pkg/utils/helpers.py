from itertools import combinations
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from core.grid import Grid, GridError


def upper_triangle_pairs(n: int) -> List[Tuple[int, int]]:
    """
    Unordered index pairs (i, j) with i < j.
    """
    return list(combinations(range(n), 2))


def symmetric_matrix(n: int, values: dict) -> np.ndarray:
    """
    Fill an n x n matrix from {(i, j): value} for i < j; zero diagonal.
    """
    out = np.zeros((n, n))
    for (i, j), value in values.items():
        out[i, j] = out[j, i] = value
    return out


def common_nx(lengths: Sequence[int], requested: int = None) -> int:
    """
    Spatial intervals for a set of signals: the requested value, or the
    longest input so no signal loses samples.
    """
    if requested is not None:
        return requested
    if not lengths:
        raise GridError("no signals given")
    return max(lengths) - 1


def frame_rows(f: np.ndarray, grid: Grid, times: Iterable[float]) -> np.ndarray:
    """
    Signal rows at arbitrary times in [0, 1], linear in t between slices.
    """
    times = np.asarray(list(times), dtype=np.float64)
    if times.size == 0:
        raise GridError("at least one frame time is required")
    if np.any(times < 0) or np.any(times > 1):
        raise GridError(f"frame times must lie in [0, 1], got {times.tolist()}")
    position = times * grid.nt
    lower = np.clip(np.floor(position).astype(int), 0, grid.nt - 1)
    weight = (position - lower)[:, None]
    return (1.0 - weight) * f[lower] + weight * f[lower + 1]


def even_times(count: int) -> np.ndarray:
    if count < 2:
        raise GridError(f"need at least two frames, got {count}")
    return np.linspace(0.0, 1.0, count)
