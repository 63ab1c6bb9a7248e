"""
Alternating minimisation of the path action.

Each iteration takes a G1 step (optimal f, z for the current v) and a G2 step
(optimal v, z for the new f), each damped by a back-tracking line search so
that the recorded action strictly decreases. `solve` repeats this from several
peak-matched starting paths and keeps the best.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from core.action import action, integrate_xt
from core.grid import ActionBreakdown, Grid, GridError, HVError, HVParams, Path
from services.bvp import g2_solve
from services.flow import CollapseError, FoldOverError, g1_solve, integrate_flow
from services.prominence import Initialization, prominence_init

logger = logging.getLogger(__name__)

STOP_TOLERANCE = "tolerance"
STOP_STALLED = "stalled"
STOP_MAX_ITERS = "max_iters"
STOP_FOLD_OVER = "fold_over"
STOP_FALLBACK = "fallback"


class SolveFailedError(HVError):
    """Raised when every initialization failed; carries the per-initialization log."""

    def __init__(self, failures: Dict[str, str]):
        self.failures = dict(failures)
        detail = "; ".join(f"{label}: {reason}" for label, reason in self.failures.items())
        super().__init__(f"all initializations failed ({detail})")


@dataclass
class SolveOptions:
    max_iters: int = 200           # N
    tol: Optional[float] = None    # delta; None means 1e-8 x initial action
    ls_max: int = 20               # line-search trials
    k_max: int = 3
    damped: bool = True
    match_minima: bool = True
    refine: bool = False
    search_iters: Optional[int] = None  # iterations per candidate before refine
    smooth: bool = False           # central differences in the velocity solve
    integrator: str = "euler"
    jacobian: str = "exponential"
    max_workers: Optional[int] = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise GridError(f"max_iters must be positive, got {self.max_iters}")
        if self.tol is not None and not self.tol > 0:
            raise GridError(f"tol must be positive, got {self.tol}")
        if self.ls_max < 1:
            raise GridError(f"ls_max must be positive, got {self.ls_max}")
        if self.k_max < 0:
            raise GridError(f"k_max must be nonnegative, got {self.k_max}")
        if self.search_iters is not None and self.search_iters < 1:
            raise GridError(f"search_iters must be positive, got {self.search_iters}")
        if self.max_workers is not None and self.max_workers < 1:
            raise GridError(f"max_workers must be positive, got {self.max_workers}")


@dataclass
class GeodesicResult:
    path: Path
    action: ActionBreakdown
    trace: List[float]
    alphas: List[Tuple[float, float]]
    k_selected: int
    converged: bool
    iterations: int
    stop_reason: str
    minima: bool = False
    k_actions: Dict[str, float] = field(default_factory=dict)
    failures: Dict[str, str] = field(default_factory=dict)

    @property
    def distance(self) -> float:
        return float(np.sqrt(self.action.total))

    def summary(self) -> Dict:
        return {
            "action": self.action.as_dict(),
            "distance": self.distance,
            "trace": list(self.trace),
            "alphas": [list(pair) for pair in self.alphas],
            "k_selected": self.k_selected,
            "minima": self.minima,
            "converged": self.converged,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "k_actions": dict(self.k_actions),
            "failures": dict(self.failures),
        }


def line_search(old: Path, proposed: Path, params: HVParams, grid: Grid, ls_max: int = 20,
                admissible: Optional[Callable[[Path], bool]] = None,
                old_action: Optional[float] = None) -> Tuple[float, bool]:
    """Back-tracking search over alpha = 1, 1/2, 1/4, ... for a blend that lowers the action.

    A trial rejected by `admissible` counts as a failed trial.
    """
    if old.shape != proposed.shape:
        raise GridError(f"cannot search between paths of shape {old.shape} and {proposed.shape}")
    baseline = action(old, params, grid).total if old_action is None else old_action
    alpha = 1.0
    for _ in range(ls_max):
        trial = old.blend(proposed, alpha)
        if action(trial, params, grid).total < baseline:
            if admissible is None or admissible(trial):
                return alpha, True
            logger.debug(f"line search: alpha={alpha:g} rejected (trajectories cross or meet)")
        alpha *= 0.5
    return 0.0, False


def _flow_is_admissible(opts: SolveOptions, grid: Grid) -> Callable[[Path], bool]:
    def check(path: Path) -> bool:
        try:
            integrate_flow(path.v, grid, method=opts.integrator, jacobian=opts.jacobian)
        except (FoldOverError, CollapseError):
            return False
        return True
    return check


def iterate(path: Path, params: HVParams, grid: Grid, opts: Optional[SolveOptions] = None,
            max_iters: Optional[int] = None, label: str = "") -> GeodesicResult:
    """Run damped (or plain) alternation from an admissible starting path.

    The endpoints f[0] and f[nt] of the starting path stay pinned throughout.
    """
    opts = opts or SolveOptions()
    n_max = max_iters or opts.max_iters
    path.check(grid)
    f0, f1 = path.f[0], path.f[-1]
    admissible = _flow_is_admissible(opts, grid)

    current = path
    current_action = action(current, params, grid).total
    delta = opts.tol if opts.tol is not None else 1e-8 * current_action
    trace = [current_action]
    alphas: List[Tuple[float, float]] = []
    stop_reason = STOP_MAX_ITERS
    iterations = 0

    if current_action <= 0.0:
        stop_reason = STOP_TOLERANCE
        iterations = 1
        n_max = 0

    for n in range(n_max):
        iterations = n + 1
        try:
            f_g1, z_g1 = g1_solve(current.v, f0, f1, grid, method=opts.integrator,
                                  jacobian=opts.jacobian)
        except (FoldOverError, CollapseError) as e:
            logger.warning(f"⚠ {label} iteration {n}: G1 step unavailable ({e})")
            stop_reason = STOP_FOLD_OVER
            break
        g1_path = Path(f=f_g1, v=current.v, z=z_g1)

        if opts.damped:
            alpha1, _ = line_search(current, g1_path, params, grid, opts.ls_max,
                                    old_action=current_action)
        else:
            alpha1 = 1.0
        half = current.blend(g1_path, alpha1)

        v_g2, z_g2 = g2_solve(half.f, params, grid, smooth=opts.smooth)
        g2_path = Path(f=half.f, v=v_g2, z=z_g2)

        if opts.damped:
            alpha2, _ = line_search(half, g2_path, params, grid, opts.ls_max, admissible=admissible)
        else:
            alpha2 = 1.0
            if not admissible(g2_path):
                stop_reason = STOP_FOLD_OVER
                break
        candidate = half.blend(g2_path, alpha2)
        candidate_action = action(candidate, params, grid).total

        if candidate_action >= current_action:
            stop_reason = STOP_STALLED
            break

        improvement = current_action - candidate_action
        current, current_action = candidate, candidate_action
        trace.append(current_action)
        alphas.append((alpha1, alpha2))
        logger.debug(f"{label} iteration {n}: action={current_action:.8g} alphas=({alpha1:g}, {alpha2:g})")

        if improvement < delta:
            stop_reason = STOP_TOLERANCE
            break

    converged = stop_reason in (STOP_TOLERANCE, STOP_STALLED)
    return GeodesicResult(
        path=current,
        action=action(current, params, grid),
        trace=trace,
        alphas=alphas,
        k_selected=0,
        converged=converged,
        iterations=iterations,
        stop_reason=stop_reason,
    )


def _candidates(f0: np.ndarray, f1: np.ndarray, grid: Grid,
                opts: SolveOptions) -> Tuple[List[Initialization], Dict[str, str]]:
    """Distinct starting paths for k = 0..k_max, plus minima matching when enabled."""
    plans = [(k, False) for k in range(opts.k_max + 1)]
    if opts.match_minima:
        plans += [(k, True) for k in range(1, opts.k_max + 1)]

    seen = set()
    inits: List[Initialization] = []
    failures: Dict[str, str] = {}
    for k, minima in plans:
        name = f"k={k}" + (" (minima)" if minima else "")
        try:
            init = prominence_init(f0, f1, k, grid, minima=minima, method=opts.integrator,
                                   jacobian=opts.jacobian)
        except (FoldOverError, CollapseError) as e:
            failures[name] = str(e)
            logger.warning(f"⚠ initialization {name} unavailable: {e}")
            continue
        # fallbacks to a smaller k repeat an earlier start
        key = (init.k_used, init.minima and init.k_used > 0)
        if key in seen:
            continue
        seen.add(key)
        inits.append(init)
    return inits, failures


def _rank(result: GeodesicResult) -> Tuple[float, int, bool]:
    return (result.action.total, result.k_selected, result.minima)


def solve(f0, f1, params: HVParams, grid: Grid, opts: Optional[SolveOptions] = None) -> GeodesicResult:
    """Iterate from every peak-matched initialization and keep the lowest action."""
    opts = opts or SolveOptions()
    f0 = grid.check_signal(f0, "f0")
    f1 = grid.check_signal(f1, "f1")

    inits, failures = _candidates(f0, f1, grid, opts)
    search_iters = opts.search_iters or opts.max_iters
    results: Dict[str, GeodesicResult] = {}

    def run(init: Initialization) -> GeodesicResult:
        result = iterate(init.path, params, grid, opts, max_iters=search_iters, label=init.label)
        result.k_selected = init.k_used
        result.minima = init.minima
        return result

    with ThreadPoolExecutor(max_workers=opts.max_workers) as executor:
        futures = {executor.submit(run, init): init for init in inits}
        for future in as_completed(futures):
            init = futures[future]
            try:
                result = future.result()
            except HVError as e:
                failures[init.label] = str(e)
                logger.warning(f"⚠ initialization {init.label} failed: {e}")
                continue
            results[init.label] = result
            logger.info(f"{init.label}: action={result.action.total:.8g} "
                        f"after {result.iterations} iteration(s) ({result.stop_reason})")

    if not results:
        logger.error(f"❌ every initialization failed: {failures}")
        raise SolveFailedError(failures)

    best_label, best = min(results.items(), key=lambda item: _rank(item[1]))
    if opts.refine and best.stop_reason == STOP_MAX_ITERS:
        logger.info(f"refining {best_label} for up to {opts.max_iters} iteration(s)")
        refined = iterate(best.path, params, grid, opts, label=f"{best_label} refine")
        refined.trace = best.trace + refined.trace[1:]
        refined.alphas = best.alphas + refined.alphas
        refined.iterations += best.iterations
        refined.k_selected, refined.minima = best.k_selected, best.minima
        best = refined

    zero_velocity = Path.linear(f0, f1, grid)
    baseline = action(zero_velocity, params, grid)
    if best.action.total > baseline.total:
        logger.warning(f"⚠ {best_label} ends above the zero-velocity path; falling back to the k=0 start")
        best_label = "k=0"
        best = GeodesicResult(
            path=zero_velocity, action=baseline, trace=[baseline.total], alphas=[], k_selected=0,
            converged=False, iterations=0, stop_reason=STOP_FALLBACK,
        )

    best.k_actions = {label: r.action.total for label, r in sorted(results.items())}
    best.failures = failures
    logger.info(f"✅ geodesic from {best_label}: distance={best.distance:.6g}")
    return best


def linear_action(f0, f1, grid: Grid) -> float:
    """Action of the zero-velocity path, half the squared trapezoid norm of f1 - f0."""
    diff = grid.check_signal(f1, "f1") - grid.check_signal(f0, "f0")
    return 0.5 * integrate_xt(np.broadcast_to(diff**2, grid.shape), grid)
