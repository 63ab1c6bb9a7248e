"""
Desk-scale experiment signals with their published weights, and the
two-bump crossover search between the vertical and transport local minima.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from core.action import integrate_xt
from core.grid import Grid, GridError, HVParams
from services.optimizer import GeodesicResult, SolveOptions, iterate
from services.parameters import HeuristicInput, estimate_params
from services.prominence import prominence_init

logger = logging.getLogger(__name__)

DEFAULT_GRID = Grid(nx=300, nt=290)


@dataclass(frozen=True)
class Experiment:
    name: str
    f0: np.ndarray
    f1: np.ndarray
    params: HVParams
    grid: Grid
    description: str = ""


def bump(x: np.ndarray, center: float, width: float, height: float = 1.0) -> np.ndarray:
    return height * np.exp(-(((x - center) / width) ** 2))


def box(x: np.ndarray, left: float, right: float, height: float = 1.0) -> np.ndarray:
    return np.where((x >= left) & (x <= right), height, 0.0)


def ricker(x: np.ndarray, center: float, frequency: float, amplitude: float = 1.0) -> np.ndarray:
    arg = (np.pi * frequency * (x - center)) ** 2
    return amplitude * (1.0 - 2.0 * arg) * np.exp(-arg)


def signed_pair(grid: Grid = DEFAULT_GRID) -> Experiment:
    x = grid.x
    f0 = bump(x, 0.3, 0.06) - 0.6 * bump(x, 0.65, 0.05)
    f1 = 0.8 * bump(x, 0.45, 0.05) - 0.7 * bump(x, 0.8, 0.06)
    return Experiment("signed", f0, f1, HVParams(0.1, 0.01, 0.0005), grid,
                      "signed signals; mixed transport and vertical change")


def two_bump(ratio: float = 0.2, grid: Grid = DEFAULT_GRID) -> Experiment:
    """Large and small bump swapping places; `ratio` is small/large height."""
    if not 0.0 < ratio <= 1.0:
        raise GridError(f"height ratio must lie in (0, 1], got {ratio}")
    x = grid.x
    f0 = bump(x, 0.3, 0.05) + ratio * bump(x, 0.7, 0.05)
    f1 = ratio * bump(x, 0.3, 0.05) + bump(x, 0.7, 0.05)
    return Experiment("two-bump", f0, f1, HVParams(0.02, 0.001, 0.002), grid,
                      f"two bumps, height ratio {ratio:g}")


def high_frequency(grid: Grid = DEFAULT_GRID, seed: int = 165) -> Experiment:
    x = grid.x
    rng = np.random.default_rng(seed)
    ripple0 = 0.05 * np.sin(2 * np.pi * 40 * x + rng.uniform(0, 2 * np.pi))
    ripple1 = 0.05 * np.sin(2 * np.pi * 37 * x + rng.uniform(0, 2 * np.pi))
    envelope = np.sin(np.pi * x) ** 2
    f0 = bump(x, 0.25, 0.05) + 0.7 * bump(x, 0.55, 0.05) + envelope * ripple0
    f1 = bump(x, 0.4, 0.05) + 0.7 * bump(x, 0.75, 0.05) + envelope * ripple1
    return Experiment("high-frequency", f0, f1, HVParams(1e-3, 5e-5, 2.5e-5), grid,
                      "two bumps with high-frequency perturbations")


def box_to_smooth(grid: Grid = DEFAULT_GRID) -> Experiment:
    x = grid.x
    return Experiment("box", box(x, 0.2, 0.4), bump(x, 0.65, 0.08), HVParams(0.02, 0.001, 0.002), grid,
                      "discontinuous source, smooth target")


def growth(grid: Grid = DEFAULT_GRID) -> Experiment:
    x = grid.x
    return Experiment("growth", bump(x, 0.4, 0.04, 0.5), bump(x, 0.55, 0.12, 1.5),
                      HVParams(0.2, 0.01, 0.02), grid, "target wider and taller than source")


def signed_bump(grid: Grid = DEFAULT_GRID) -> Experiment:
    x = grid.x
    f0 = bump(x, 0.35, 0.06, 0.4) - 0.2 * bump(x, 0.55, 0.05)
    f1 = bump(x, 0.6, 0.1, 0.35) - 0.15 * bump(x, 0.3, 0.04)
    params = estimate_params(HeuristicInput(H=0.4, W=0.4, L=0.3))
    return Experiment("signed-bump", f0, f1, params, grid,
                      "signed single bumps of different width, weights from H=0.4, W=0.4, L=0.3")


def seismic(grid: Grid = DEFAULT_GRID) -> Experiment:
    x = grid.x
    f0 = ricker(x, 0.3, 25.0) + 0.6 * ricker(x, 0.55, 25.0)
    f1 = 0.8 * ricker(x, 0.38, 25.0) + 0.7 * ricker(x, 0.62, 25.0) - 0.3 * ricker(x, 0.8, 25.0)
    params = estimate_params(HeuristicInput(H=2.0, W=0.02, L=0.1))
    return Experiment("seismic", f0, f1, params, grid, "synthetic seismic traces, H=2, L=0.1, W=0.02")


EXPERIMENTS: Dict[str, Callable[..., Experiment]] = {
    "signed": signed_pair,
    "two-bump": two_bump,
    "high-frequency": high_frequency,
    "box": box_to_smooth,
    "growth": growth,
    "signed-bump": signed_bump,
    "seismic": seismic,
}


def get_experiment(name: str, grid: Optional[Grid] = None) -> Experiment:
    try:
        factory = EXPERIMENTS[name]
    except KeyError:
        raise GridError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}") from None
    return factory(grid=grid or DEFAULT_GRID)


@dataclass
class BranchPair:
    ratio: float
    vertical: GeodesicResult
    transport: GeodesicResult

    @property
    def gap(self) -> float:
        """Relative difference (transport - vertical) / max of the two."""
        a, b = self.transport.action.total, self.vertical.action.total
        return (a - b) / max(a, b)

    def separation(self, grid: Grid) -> float:
        diff = self.transport.path.f - self.vertical.path.f
        return float(np.sqrt(integrate_xt(diff**2, grid)))


@dataclass
class CrossoverResult:
    ratio: float
    pair: BranchPair
    history: List[Tuple[float, float]] = field(default_factory=list)


def two_bump_branches(ratio: float, grid: Grid = DEFAULT_GRID,
                      opts: Optional[SolveOptions] = None) -> BranchPair:
    """Iterate the two-bump pair from the zero-velocity and the peak-matched starts.

    The large bump is the single most prominent peak of each signal, so the
    transport branch starts from the one-peak matching.
    """
    opts = opts or SolveOptions()
    exp = two_bump(ratio, grid)
    results = []
    for k in (0, 1):
        init = prominence_init(exp.f0, exp.f1, k, grid, method=opts.integrator, jacobian=opts.jacobian)
        result = iterate(init.path, exp.params, grid, opts, label=f"ratio={ratio:g} {init.label}")
        result.k_selected = init.k_used
        results.append(result)
    return BranchPair(ratio=ratio, vertical=results[0], transport=results[1])


def two_bump_crossover(low: float = 0.1, high: float = 0.8, grid: Grid = DEFAULT_GRID,
                       opts: Optional[SolveOptions] = None, rel_tol: float = 0.05,
                       max_steps: int = 8) -> CrossoverResult:
    """Bisect the height ratio until the two local-minimum actions agree within rel_tol."""
    lo = two_bump_branches(low, grid, opts)
    hi = two_bump_branches(high, grid, opts)
    history = [(low, lo.gap), (high, hi.gap)]
    if lo.gap >= 0 or hi.gap <= 0:
        raise GridError(
            f"ratios {low:g}/{high:g} do not bracket the crossover (gaps {lo.gap:.3g}, {hi.gap:.3g})"
        )

    best = lo if abs(lo.gap) < abs(hi.gap) else hi
    for _ in range(max_steps):
        if abs(best.gap) <= rel_tol:
            break
        mid_ratio = 0.5 * (lo.ratio + hi.ratio)
        mid = two_bump_branches(mid_ratio, grid, opts)
        history.append((mid_ratio, mid.gap))
        logger.info(f"crossover search: ratio={mid_ratio:.4f} gap={mid.gap:+.4f}")
        if mid.gap < 0:
            lo = mid
        else:
            hi = mid
        if abs(mid.gap) < abs(best.gap):
            best = mid
    return CrossoverResult(ratio=best.ratio, pair=best, history=history)
