"""
Lagrangian machinery for the velocity-fixed sub-problem.

integrate_flow follows the trajectories of v and accumulates the spatial
Jacobian along them; g1_solve uses the closed-form representation of the
optimal (f, z) for a fixed v and maps it back to the grid.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from core.action import ddx, integrate_xt
from core.grid import Grid, HVError

logger = logging.getLogger(__name__)

FOLD_TOLERANCE = 1e-8
INTEGRATORS = ("euler", "rk4")
JACOBIAN_ROUTES = ("exponential", "conservation")


class FoldOverError(HVError):
    """Raised when two trajectories cross; refine nt or damp v."""

    def __init__(self, time_index: int, overlap: float):
        self.time_index = time_index
        self.overlap = overlap
        super().__init__(
            f"trajectories cross at time slice {time_index} (overlap {overlap:.3e}); "
            f"refine nt or damp the velocity"
        )


class CollapseError(HVError):
    """Raised when trajectories coincide and the grid-return interpolation is undefined."""

    def __init__(self, time_index: int):
        self.time_index = time_index
        super().__init__(f"trajectories coincide at time slice {time_index}")


@dataclass(frozen=True)
class FlowField:
    phi: np.ndarray
    dphi: np.ndarray
    jac: np.ndarray
    eta: np.ndarray
    jac_integral: np.ndarray  # per-trajectory trapezoid integral of jac over t


def _sample(row: np.ndarray, x: np.ndarray, positions: np.ndarray) -> np.ndarray:
    return np.interp(positions, x, row)


def _conservative_jacobian(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Eulerian solve of J_t + (J v)_x = 0, J(x,0) = 1, by first-order upwind fluxes."""
    dx, dt = grid.dx, grid.dt
    J = np.ones(grid.nx + 1)
    out = np.empty(grid.shape)
    out[0] = J
    # nodal control volumes, halved at the walls
    volume = np.full(grid.nx + 1, dx)
    volume[0] = volume[-1] = 0.5 * dx
    for j in range(grid.nt):
        face = 0.5 * (v[j, :-1] + v[j, 1:])
        speed = float(np.abs(face).max()) if face.size else 0.0
        substeps = max(1, math.ceil(speed * dt / (0.5 * dx)))
        h = dt / substeps
        for _ in range(substeps):
            flux = np.where(face > 0, face * J[:-1], face * J[1:])
            divergence = np.zeros_like(J)
            divergence[:-1] += flux
            divergence[1:] -= flux
            J = J - h * divergence / volume
        out[j + 1] = J
    return out


def integrate_flow(v: np.ndarray, grid: Grid, method: str = "euler",
                   jacobian: str = "exponential") -> FlowField:
    """Integrate trajectories of v from Phi(x,0) = x and the Jacobian along them.

    method: "euler" (default, first order) or "rk4".
    jacobian: "exponential" accumulates -int v_x along trajectories;
    "conservation" samples an Eulerian solve of the continuity equation.
    Raises FoldOverError when neighbours swap by more than a tolerance and
    CollapseError when they meet, the same criterion g1_solve needs.
    """
    if method not in INTEGRATORS:
        raise ValueError(f"unknown integrator {method!r}; expected one of {INTEGRATORS}")
    if jacobian not in JACOBIAN_ROUTES:
        raise ValueError(f"unknown jacobian route {jacobian!r}; expected one of {JACOBIAN_ROUTES}")

    v = grid.check_field(v, "v")
    x = grid.x
    dt = grid.dt
    vx = ddx(v, grid.dx)
    tol = grid.dx * FOLD_TOLERANCE

    phi = np.empty(grid.shape)
    log_dphi = np.zeros(grid.shape)
    phi[0] = x

    for j in range(grid.nt):
        p = phi[j]
        if method == "euler":
            step = dt * _sample(v[j], x, p)
            growth = dt * _sample(vx[j], x, p)
        else:
            v_mid = 0.5 * (v[j] + v[j + 1])
            vx_mid = 0.5 * (vx[j] + vx[j + 1])
            k1 = _sample(v[j], x, p)
            k2 = _sample(v_mid, x, p + 0.5 * dt * k1)
            k3 = _sample(v_mid, x, p + 0.5 * dt * k2)
            k4 = _sample(v[j + 1], x, p + dt * k3)
            s1 = _sample(vx[j], x, p)
            s2 = _sample(vx_mid, x, p + 0.5 * dt * k1)
            s3 = _sample(vx_mid, x, p + 0.5 * dt * k2)
            s4 = _sample(vx[j + 1], x, p + dt * k3)
            step = dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            growth = dt * (s1 + 2.0 * s2 + 2.0 * s3 + s4) / 6.0

        nxt = np.clip(p + step, 0.0, 1.0)
        nxt[0], nxt[-1] = 0.0, 1.0
        gaps = np.diff(nxt)
        if np.any(gaps < -tol):
            raise FoldOverError(j + 1, float(-gaps.min()))
        if np.any(gaps <= 0.0):
            raise CollapseError(j + 1)
        phi[j + 1] = nxt
        log_dphi[j + 1] = log_dphi[j] + growth

    if jacobian == "exponential":
        jac = np.exp(-log_dphi)
        dphi = np.exp(log_dphi)
    else:
        eulerian = _conservative_jacobian(v, grid)
        jac = np.vstack([_sample(eulerian[j], x, phi[j]) for j in range(grid.nt + 1)])
        if np.any(jac <= 0):
            raise FoldOverError(int(np.argmax(np.any(jac <= 0, axis=1))), 0.0)
        dphi = 1.0 / jac

    running = cumulative_trapezoid(jac, dx=dt, axis=0, initial=0.0)
    total = running[-1].copy()
    eta = running / total[None, :]

    logger.debug(f"flow integrated ({method}, {jacobian}): jac in [{jac.min():.4g}, {jac.max():.4g}]")
    return FlowField(phi=phi, dphi=dphi, jac=jac, eta=eta, jac_integral=total)


def g1_trajectories(flow: FlowField, f0: np.ndarray, f1: np.ndarray,
                    grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    """Optimal (f, z) sampled along each trajectory: (fhat, zhat)."""
    f0 = grid.check_signal(f0, "f0")
    f1 = grid.check_signal(f1, "f1")
    f1_end = np.interp(flow.phi[-1], grid.x, f1)
    jump = f1_end - f0
    zhat = jump[None, :] * flow.jac / flow.jac_integral[None, :]
    fhat = (1.0 - flow.eta) * f0[None, :] + flow.eta * f1_end[None, :]
    return fhat, zhat


def g1_solve(v: np.ndarray, f0: np.ndarray, f1: np.ndarray, grid: Grid,
             method: str = "euler", jacobian: str = "exponential",
             flow: Optional[FlowField] = None) -> Tuple[np.ndarray, np.ndarray]:
    """For fixed v, return the (f, z) minimising the vertical action on the grid."""
    if flow is None:
        flow = integrate_flow(v, grid, method=method, jacobian=jacobian)
    fhat, zhat = g1_trajectories(flow, f0, f1, grid)

    x = grid.x
    f = np.empty(grid.shape)
    z = np.empty(grid.shape)
    for j in range(grid.nt + 1):
        p = flow.phi[j]
        if np.any(np.diff(p) <= 0.0):
            raise CollapseError(j)
        f[j] = np.interp(x, p, fhat[j])
        z[j] = np.interp(x, p, zhat[j])

    f[0] = f0
    f[-1] = f1
    return f, z


def lagrangian_vertical_action(z_traj: np.ndarray, flow: FlowField, grid: Grid) -> float:
    """Half the integral of z^2 written along trajectories: z(Phi)^2 DPhi dx dt."""
    return 0.5 * integrate_xt(z_traj**2 * flow.dphi, grid)
