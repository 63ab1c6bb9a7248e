"""
Signal-fixed sub-problem: for each time slice, solve the fourth-order
boundary-value problem

    eps v'''' - lam v'' + (kappa + f_x^2) v = -f_t f_x,   v = v'' = 0 on the boundary,

discretised as a pentadiagonal system in LAPACK band storage, and recover the
source z = f_t + v f_x.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from core.grid import Grid, HVError, HVParams, Path

logger = logging.getLogger(__name__)

# (lower, upper) bandwidths of the pentadiagonal operator
BANDWIDTHS = (2, 2)
RESIDUAL_TOLERANCE = 1e-10
REFINEMENT_STEPS = 3
# multiple of eps * |band| |v| tolerated on slices too stiff for the absolute bound
ROUNDING_SLACK = 8.0


class DegenerateMetricError(HVError):
    """Raised when the fourth-order weight vanishes."""

    def __init__(self):
        super().__init__(
            "epsilon must be positive: with epsilon = 0 the metric degenerates and action "
            "minimisers need not exist (see `demo-degeneracy`); the second-order solve is not offered"
        )


class SliceSolveError(HVError):
    """Raised when a slice system cannot be factorised or the solve is inaccurate."""

    def __init__(self, message: str, slice_index: Optional[int] = None):
        self.slice_index = slice_index
        where = f"slice {slice_index}: " if slice_index is not None else ""
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class SliceSystem:
    """One time slice of the velocity solve; `band` is (5, nx+1) LAPACK storage."""

    band: np.ndarray
    rhs: np.ndarray
    w: np.ndarray
    tau: np.ndarray


def operator_band(diagonal_extra: np.ndarray, params: HVParams, grid: Grid) -> np.ndarray:
    """Banded operator with identity boundary rows and ghost-reflected corner rows.

    `diagonal_extra` is added to kappa on the interior diagonal (w^2 for the
    velocity solve, zeros for the tangent projection). No epsilon gate.
    """
    n = grid.nx + 1
    dx = grid.dx
    e4 = params.epsilon / dx**4
    l2 = params.lambda_ / dx**2

    diag = np.empty(n)
    diag[1:-1] = params.kappa + diagonal_extra[1:-1] + 2.0 * l2 + 6.0 * e4
    diag[1] = params.kappa + diagonal_extra[1] + 2.0 * l2 + 5.0 * e4
    diag[-2] = params.kappa + diagonal_extra[-2] + 2.0 * l2 + 5.0 * e4
    diag[0] = diag[-1] = 1.0

    # a[i, j] lives at band[2 + i - j, j]
    band = np.zeros((5, n))
    band[2] = diag
    # a[i, i+1] and a[i+1, i] for rows 1..n-2
    band[1, 2:] = -4.0 * e4 - l2
    band[3, :-2] = -4.0 * e4 - l2
    # a[i, i+2] for rows 1..n-3, a[i+2, i] for rows 2..n-2
    band[0, 3:] = e4
    band[4, :-3] = e4
    return band


def banded_matvec(band: np.ndarray, vec: np.ndarray) -> np.ndarray:
    lower, upper = BANDWIDTHS
    out = band[upper] * vec
    for k in range(1, upper + 1):
        out[:-k] += band[upper - k, k:] * vec[k:]
    for k in range(1, lower + 1):
        out[k:] += band[upper + k, :-k] * vec[:-k]
    return out


def banded_to_dense(band: np.ndarray) -> np.ndarray:
    lower, upper = BANDWIDTHS
    n = band.shape[1]
    dense = np.zeros((n, n))
    for i in range(n):
        for j in range(max(0, i - lower), min(n, i + upper + 1)):
            dense[i, j] = band[upper + i - j, j]
    return dense


def slopes(f_now: np.ndarray, grid: Grid, smooth: bool = False) -> np.ndarray:
    """Discrete f_x with zero end entries: forward differences, or central if smooth."""
    w = np.zeros(grid.nx + 1)
    if smooth:
        w[1:-1] = (f_now[2:] - f_now[:-2]) / (2.0 * grid.dx)
    else:
        w[1:-1] = (f_now[2:] - f_now[1:-1]) / grid.dx
    return w


def _rates(f_now: np.ndarray, f_next: np.ndarray, grid: Grid, step: float) -> np.ndarray:
    tau = np.zeros(grid.nx + 1)
    tau[1:-1] = (f_next[1:-1] - f_now[1:-1]) / step
    return tau


def _system(w: np.ndarray, tau: np.ndarray, params: HVParams, grid: Grid) -> SliceSystem:
    rhs = -tau * w
    rhs[0] = rhs[-1] = 0.0
    return SliceSystem(band=operator_band(w**2, params, grid), rhs=rhs, w=w, tau=tau)


def assemble(f_now: np.ndarray, f_next: np.ndarray, params: HVParams, grid: Grid,
             smooth: bool = False) -> SliceSystem:
    """Slice system for (f_now, f_next): tau by forward time difference over dt."""
    if params.epsilon <= 0:
        raise DegenerateMetricError()
    f_now = grid.check_signal(f_now, "f_now")
    f_next = grid.check_signal(f_next, "f_next")
    return _system(slopes(f_now, grid, smooth), _rates(f_now, f_next, grid, grid.dt), params, grid)


def slice_residual(band: np.ndarray, v: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """band @ v - rhs accumulated in extended precision."""
    wide = banded_matvec(band.astype(np.longdouble), v.astype(np.longdouble))
    return wide - rhs.astype(np.longdouble)


def relative_residual(band: np.ndarray, v: np.ndarray, rhs: np.ndarray) -> float:
    """max|band v - rhs| / (1 + max|rhs|)."""
    return float(np.abs(slice_residual(band, v, rhs)).max() / (1.0 + np.abs(rhs).max()))


def rounding_floor(band: np.ndarray, v: np.ndarray) -> float:
    """Residual level left by rounding v itself to double: a multiple of eps * max(|band| |v|)."""
    return ROUNDING_SLACK * np.finfo(np.float64).eps * float(banded_matvec(np.abs(band), np.abs(v)).max())


def solve_slice(system: SliceSystem, slice_index: Optional[int] = None) -> np.ndarray:
    """Banded LU (partial pivoting) solve of one slice system.

    The LU solution is polished by iterative refinement against an
    extended-precision residual, aiming for max|band v - rhs| <= 1e-10 (1 + max|rhs|).
    Stiff slices (large eps / dx^4) may stop at the rounding floor of v instead.
    """
    band, rhs = system.band, system.rhs
    try:
        v = solve_banded(BANDWIDTHS, band, rhs, check_finite=True)
        best, best_residual = v, relative_residual(band, v, rhs)
        for _ in range(REFINEMENT_STEPS):
            if best_residual <= RESIDUAL_TOLERANCE:
                break
            v = v - solve_banded(BANDWIDTHS, band, slice_residual(band, v, rhs).astype(np.float64),
                                 check_finite=True)
            residual = relative_residual(band, v, rhs)
            if residual < best_residual:
                best, best_residual = v, residual
    except (LinAlgError, ValueError) as e:
        raise SliceSolveError(f"banded factorisation failed: {e}", slice_index) from e

    if __debug__:
        scale = 1.0 + np.abs(rhs).max()
        allowed = RESIDUAL_TOLERANCE + rounding_floor(band, best) / scale
        if best_residual > allowed:
            raise SliceSolveError(f"relative residual {best_residual:.3e} exceeds {allowed:.3e}",
                                  slice_index)
    return best


def g2_solve(f: np.ndarray, params: HVParams, grid: Grid,
             smooth: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """Velocity-optimal (v, z) for the signal field f, one banded solve per slice."""
    if params.epsilon <= 0:
        raise DegenerateMetricError()
    f = grid.check_field(f, "f")

    v = np.empty(grid.shape)
    z = np.empty(grid.shape)
    for j in range(grid.nt + 1):
        rate = _full_rate(f, j, grid, smooth)
        tau = rate.copy()
        tau[0] = tau[-1] = 0.0
        w = slopes(f[j], grid, smooth)
        v[j] = solve_slice(_system(w, tau, params, grid), slice_index=j)
        v[j, 0] = v[j, -1] = 0.0
        z[j] = rate + v[j] * _full_slope(f[j], grid, smooth)

    logger.debug(f"g2 solve: |v|max={np.abs(v).max():.4g}")
    return v, z


def _full_slope(row: np.ndarray, grid: Grid, smooth: bool) -> np.ndarray:
    """f_x on every node; the interior matches `slopes`, ends are one-sided."""
    w = slopes(row, grid, smooth)
    w[0] = (row[1] - row[0]) / grid.dx
    w[-1] = (row[-1] - row[-2]) / grid.dx
    return w


def _full_rate(f: np.ndarray, j: int, grid: Grid, smooth: bool) -> np.ndarray:
    """f_t on every node of slice j with the same differencing as the slice solve."""
    nt = grid.nt
    if smooth and 0 < j < nt:
        return (f[j + 1] - f[j - 1]) / (2.0 * grid.dt)
    if j < nt:
        return (f[j + 1] - f[j]) / grid.dt
    return (f[nt] - f[nt - 1]) / grid.dt


def tangent_project(f_slice: np.ndarray, zbar: np.ndarray, params: HVParams, grid: Grid,
                    smooth: bool = False) -> np.ndarray:
    """Velocity representing the tangent vector zbar at f_slice.

    Solves eps v'''' - lam v'' + kappa v = -f_x zbar with the same boundary rows.
    """
    if params.epsilon <= 0:
        raise DegenerateMetricError()
    f_slice = grid.check_signal(f_slice, "f_slice")
    zbar = grid.check_signal(zbar, "zbar")
    w = slopes(f_slice, grid, smooth)
    rhs = -w * zbar
    rhs[0] = rhs[-1] = 0.0
    system = SliceSystem(
        band=operator_band(np.zeros(grid.nx + 1), params, grid), rhs=rhs, w=w,
        tau=np.zeros(grid.nx + 1),
    )
    v = solve_slice(system)
    v[0] = v[-1] = 0.0
    return v


def euler_lagrange_residual(path: Path, params: HVParams, grid: Grid,
                            smooth: bool = False) -> np.ndarray:
    """Per-slice max-norm of (eps D4 - lam D2 + kappa) v + z f_x, scaled by 1 + |z f_x|.

    Slices follow the velocity solve's differencing, so a path produced by
    g2_solve has residuals at floating-point level.
    """
    out = np.empty(grid.nt + 1)
    operator = operator_band(np.zeros(grid.nx + 1), params, grid)
    for j in range(grid.nt + 1):
        w = slopes(path.f[j], grid, smooth)
        forcing = path.z[j] * w
        forcing[0] = forcing[-1] = 0.0
        lhs = banded_matvec(operator, path.v[j])
        lhs[0] = lhs[-1] = 0.0
        out[j] = np.abs(lhs + forcing).max() / (1.0 + np.abs(forcing).max())
    return out
