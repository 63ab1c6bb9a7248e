"""
Peak prominence ranking and the monotone matching map used to build
transport-style starting paths for the optimizer.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.signal import find_peaks, peak_prominences

from core.grid import Grid, GridError, Path
from services.flow import g1_solve

logger = logging.getLogger(__name__)


def prominences(signal) -> List[Tuple[int, float]]:
    """(index, prominence) for every strict interior local maximum, in index order.

    Plateau maxima are reported at their leftmost index. Only routes that end
    at a strictly higher sample count; a side that reaches the signal edge
    first is ignored. A peak with no strictly higher sample anywhere measures
    its drop to the global minimum.
    """
    values = np.asarray(signal, dtype=np.float64)
    if values.ndim != 1 or values.size < 3:
        raise GridError(f"prominences need a 1-D signal of length >= 3, got shape {values.shape}")

    _, props = find_peaks(values, plateau_size=1)
    peaks = np.asarray(props["left_edges"], dtype=np.intp)
    if peaks.size == 0:
        return []

    proms, left_bases, right_bases = peak_prominences(values, peaks)
    heights = values[peaks]
    # running maxima strictly before / after each index
    before = np.concatenate([[-np.inf], np.maximum.accumulate(values)[:-1]])
    after = np.concatenate([np.maximum.accumulate(values[::-1])[::-1][1:], [-np.inf]])
    higher_left = before[peaks] > heights
    higher_right = after[peaks] > heights

    proms = np.where(higher_left & ~higher_right, heights - values[left_bases], proms)
    proms = np.where(higher_right & ~higher_left, heights - values[right_bases], proms)
    proms = np.where(~higher_left & ~higher_right, heights - values.min(), proms)
    return [(int(i), float(p)) for i, p in zip(peaks, proms)]


def rank_peaks(signal, k: int) -> List[int]:
    """Indices of the k most prominent peaks; ties go to the higher peak, then the smaller index."""
    values = np.asarray(signal, dtype=np.float64)
    ranked = sorted(prominences(values), key=lambda item: (-item[1], -values[item[0]], item[0]))
    return [index for index, _ in ranked[:k]]


@dataclass(frozen=True)
class MatchingMap:
    """Piecewise-linear monotone map with T(0)=0, T(1)=1 and T(knots_x) = knots_y."""

    knots_x: np.ndarray
    knots_y: np.ndarray

    def __post_init__(self):
        kx = np.asarray(self.knots_x, dtype=np.float64)
        ky = np.asarray(self.knots_y, dtype=np.float64)
        if kx.shape != ky.shape or kx.ndim != 1:
            raise GridError("matching knots must be two 1-D arrays of equal length")
        for name, knots in (("knots_x", kx), ("knots_y", ky)):
            nodes = np.concatenate([[0.0], knots, [1.0]])
            if np.any(np.diff(nodes) <= 0):
                raise GridError(f"{name} must be strictly increasing inside (0, 1)")
        object.__setattr__(self, "knots_x", kx)
        object.__setattr__(self, "knots_y", ky)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        xp = np.concatenate([[0.0], self.knots_x, [1.0]])
        fp = np.concatenate([[0.0], self.knots_y, [1.0]])
        return np.interp(x, xp, fp)


@dataclass(frozen=True)
class Initialization:
    v0: np.ndarray
    path: Path
    k_requested: int
    k_used: int
    minima: bool = False
    matching: Optional[MatchingMap] = field(default=None, compare=False)

    @property
    def label(self) -> str:
        return f"k={self.k_used}" + (" (minima)" if self.minima else "")


def matching_map(f0: np.ndarray, f1: np.ndarray, k: int, grid: Grid) -> Tuple[Optional[MatchingMap], int]:
    """Pair the k most prominent peaks of each signal in spatial order."""
    k_used = min(k, len(prominences(f0)), len(prominences(f1)))
    if k_used < k:
        logger.info(f"only {k_used} peak pair(s) available, requested {k}")
    if k_used == 0:
        return None, 0
    x = grid.x
    source = np.sort(np.asarray(rank_peaks(f0, k_used)))
    target = np.sort(np.asarray(rank_peaks(f1, k_used)))
    return MatchingMap(knots_x=x[source], knots_y=x[target]), k_used


def prominence_init(f0, f1, k: int, grid: Grid, minima: bool = False,
                    method: str = "euler", jacobian: str = "exponential") -> Initialization:
    """Starting path from peak matching: v0(x,t) = T(x) - x, completed by the G1 step.

    With minima=True the peaks of -f0 and -f1 are matched instead.
    """
    if k < 0:
        raise GridError(f"k must be nonnegative, got {k}")
    f0 = grid.check_signal(f0, "f0")
    f1 = grid.check_signal(f1, "f1")
    sign = -1.0 if minima else 1.0

    matching, k_used = matching_map(sign * f0, sign * f1, k, grid)
    v0 = np.zeros(grid.shape)
    if matching is not None:
        v0[:] = matching(grid.x) - grid.x
        v0[:, 0] = v0[:, -1] = 0.0

    f, z = g1_solve(v0, f0, f1, grid, method=method, jacobian=jacobian)
    return Initialization(
        v0=v0, path=Path(f=f, v=v0, z=z), k_requested=k, k_used=k_used,
        minima=minima, matching=matching,
    )
