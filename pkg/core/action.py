"""
core/action.py: Discrete action functional, constraint residual and the
finite-difference stencils they share with the boundary-value solver.
"""
import logging

import numpy as np
from scipy.integrate import trapezoid

from core.grid import ActionBreakdown, DimensionError, Grid, HVParams, Path

logger = logging.getLogger(__name__)


def ddx(values: np.ndarray, dx: float) -> np.ndarray:
    """Central differences inside, one-sided at both ends, along the last axis."""
    return np.gradient(values, dx, axis=-1, edge_order=1)


def d2dx2(values: np.ndarray, dx: float) -> np.ndarray:
    """Second difference along the last axis with odd ghost points.

    The ghosts v(-dx) = -v(dx) and v(1+dx) = -v(1-dx) encode v_xx = 0 at the
    boundary and match the corner rows of the banded operator.
    """
    values = np.asarray(values, dtype=np.float64)
    left = -values[..., 1:2]
    right = -values[..., -2:-1]
    padded = np.concatenate([left, values, right], axis=-1)
    return (padded[..., 2:] - 2.0 * padded[..., 1:-1] + padded[..., :-2]) / dx**2


def integrate_xt(values: np.ndarray, grid: Grid) -> float:
    """Composite trapezoid over x, then over t."""
    return float(trapezoid(trapezoid(values, dx=grid.dx, axis=-1), dx=grid.dt))


def l2_norm(signal: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(trapezoid(np.square(signal), dx=grid.dx)))


def h2_norm(v: np.ndarray, grid: Grid) -> float:
    """Discrete norm of v in L2(0,1; H2(0,1)) with the action's stencils."""
    v = grid.check_field(v, "v")
    integrand = v**2 + ddx(v, grid.dx) ** 2 + d2dx2(v, grid.dx) ** 2
    return float(np.sqrt(integrate_xt(integrand, grid)))


def action(path: Path, params: HVParams, grid: Grid, prefactor: float = 0.5) -> ActionBreakdown:
    """Evaluate prefactor * integral of (kappa v^2 + lambda v_x^2 + epsilon v_xx^2 + z^2).

    The default prefactor of one half is the path energy; degeneracy arithmetic
    passes prefactor=1.
    """
    if path.shape != grid.shape:
        raise DimensionError(f"path shape {path.shape} does not match grid {grid.shape}")

    v = path.v
    kinetic = prefactor * params.kappa * integrate_xt(v**2, grid)
    grad = prefactor * params.lambda_ * integrate_xt(ddx(v, grid.dx) ** 2, grid)
    if params.epsilon > 0:
        curv = prefactor * params.epsilon * integrate_xt(d2dx2(v, grid.dx) ** 2, grid)
    else:
        curv = 0.0
    vertical = prefactor * integrate_xt(path.z**2, grid)

    return ActionBreakdown(
        total=kinetic + grad + curv + vertical,
        kinetic_v=kinetic,
        grad_v=grad,
        curv_v=curv,
        vertical_z=vertical,
    )


def constraint_residual(path: Path, grid: Grid) -> float:
    """Max defect of f_t + v f_x = z over interior nodes and slices 0..nt-1."""
    if path.shape != grid.shape:
        raise DimensionError(f"path shape {path.shape} does not match grid {grid.shape}")

    f, v, z = path.f, path.v, path.z
    f_t = (f[1:, 1:-1] - f[:-1, 1:-1]) / grid.dt
    f_x = (f[:-1, 2:] - f[:-1, :-2]) / (2.0 * grid.dx)
    defect = np.abs(f_t + v[:-1, 1:-1] * f_x - z[:-1, 1:-1])
    return float(defect.max()) if defect.size else 0.0
