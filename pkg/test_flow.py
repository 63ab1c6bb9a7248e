import numpy as np
import pytest
from scipy.integrate import trapezoid

from conftest import bumps
from core.action import constraint_residual
from core.grid import Grid, Path
from services.flow import (
    CollapseError,
    FoldOverError,
    g1_solve,
    g1_trajectories,
    integrate_flow,
    lagrangian_vertical_action,
)


def _velocity(grid, amplitude=0.2):
    x, t = grid.x[None, :], grid.t[:, None]
    v = amplitude * np.sin(np.pi * x) * (1.0 + 0.5 * t)
    v[:, 0] = v[:, -1] = 0.0
    return v


def _signals(grid):
    f0 = bumps(grid.x, [0.35], [0.1], [1.0])
    f1 = bumps(grid.x, [0.55], [0.12], [0.8])
    return f0, f1


def test_stationary_flow(small_grid):
    flow = integrate_flow(np.zeros(small_grid.shape), small_grid)
    assert np.allclose(flow.phi, small_grid.x[None, :])
    assert np.allclose(flow.jac, 1.0) and np.allclose(flow.dphi, 1.0)
    assert np.allclose(flow.eta, small_grid.t[:, None], atol=1e-14)


def test_logistic_flow_matches_closed_form():
    grid = Grid(nx=200, nt=100)
    a = 0.5
    v = np.broadcast_to(a * grid.x * (1.0 - grid.x), grid.shape)
    x = grid.x
    exact = x * np.exp(a) / (1.0 - x + x * np.exp(a))

    euler = integrate_flow(v, grid).phi[-1]
    rk4 = integrate_flow(v, grid, method="rk4").phi[-1]
    euler_error = np.abs(euler - exact).max()
    rk4_error = np.abs(rk4 - exact).max()
    assert euler_error < 5 * grid.dt
    assert rk4_error < 1e-4
    assert rk4_error < euler_error


def test_boundary_trajectories_fixed_and_eta_monotone(small_grid):
    flow = integrate_flow(_velocity(small_grid), small_grid)
    assert np.all(flow.phi[:, 0] == 0.0) and np.all(flow.phi[:, -1] == 1.0)
    assert np.all(np.diff(flow.phi, axis=1) > 0)
    assert np.all(flow.jac > 0) and np.all(flow.jac[0] == 1.0)
    assert np.allclose(flow.eta[0], 0.0) and np.allclose(flow.eta[-1], 1.0)
    assert np.all(np.diff(flow.eta, axis=0) >= 0)
    assert np.allclose(flow.jac * flow.dphi, 1.0, atol=10 * (small_grid.dx + small_grid.dt))


def test_conservation_route_agrees_with_exponential():
    grid = Grid(nx=200, nt=200)
    v = _velocity(grid, amplitude=0.3)
    exponential = integrate_flow(v, grid)
    conservative = integrate_flow(v, grid, jacobian="conservation")
    assert np.abs(exponential.jac - conservative.jac).max() < 10 * (grid.dx + grid.dt)


def test_unknown_routes_rejected(small_grid):
    v = np.zeros(small_grid.shape)
    with pytest.raises(ValueError):
        integrate_flow(v, small_grid, method="midpoint")
    with pytest.raises(ValueError):
        integrate_flow(v, small_grid, jacobian="spectral")


def test_fold_over_detected():
    grid = Grid(nx=20, nt=10)
    v = np.broadcast_to(20.0 * np.sin(2 * np.pi * grid.x), grid.shape).copy()
    v[:, 0] = v[:, -1] = 0.0
    with pytest.raises(FoldOverError) as info:
        integrate_flow(v, grid)
    assert info.value.time_index >= 1


def _wall_velocity(grid):
    """Pushes the node next to x = 1 past the wall during the first step."""
    v = np.zeros(grid.shape)
    v[0, -2] = 0.4
    return v


def test_trajectory_clipped_onto_wall_collapses():
    grid = Grid(nx=10, nt=2)
    v = _wall_velocity(grid)
    with pytest.raises(CollapseError) as info:
        integrate_flow(v, grid)
    assert info.value.time_index == 1
    with pytest.raises(CollapseError):
        g1_solve(v, np.zeros(11), np.ones(11), grid)


def test_zero_velocity_gives_linear_path(small_grid, smooth_signal):
    f0, f1 = smooth_signal(small_grid), smooth_signal(small_grid)
    f, z = g1_solve(np.zeros(small_grid.shape), f0, f1, small_grid)
    linear = Path.linear(f0, f1, small_grid)
    assert np.allclose(f, linear.f, atol=1e-12)
    assert np.allclose(z, f1 - f0, atol=1e-12)


def test_equal_endpoints_give_zero_source(small_grid, smooth_signal):
    f0 = smooth_signal(small_grid)
    f, z = g1_solve(np.zeros(small_grid.shape), f0, f0, small_grid)
    assert np.allclose(z, 0.0)
    assert np.allclose(f, f0[None, :])


def test_trajectory_representation(small_grid):
    f0, f1 = _signals(small_grid)
    flow = integrate_flow(_velocity(small_grid), small_grid)
    fhat, zhat = g1_trajectories(flow, f0, f1, small_grid)

    # z * DPhi is constant along each trajectory
    tol = 10 * (small_grid.dx + small_grid.dt)
    assert np.allclose(zhat * flow.dphi, zhat[0][None, :], atol=tol)

    # fhat interpolates between f0 and the pulled-back target
    f1_end = np.interp(flow.phi[-1], small_grid.x, f1)
    low, high = np.minimum(f0, f1_end), np.maximum(f0, f1_end)
    assert np.all(fhat >= low - 1e-12) and np.all(fhat <= high + 1e-12)

    # each trajectory accumulates exactly the required change
    change = trapezoid(zhat, dx=small_grid.dt, axis=0)
    assert np.allclose(change, f1_end - f0, atol=1e-12)


def test_g1_source_is_optimal_along_trajectories(rng, small_grid):
    f0, f1 = _signals(small_grid)
    flow = integrate_flow(_velocity(small_grid), small_grid)
    _, zhat = g1_trajectories(flow, f0, f1, small_grid)
    best = lagrangian_vertical_action(zhat, flow, small_grid)

    for _ in range(10):
        bump = rng.normal(size=small_grid.shape)
        bump -= trapezoid(bump, dx=small_grid.dt, axis=0)[None, :]
        competitor = lagrangian_vertical_action(zhat + 0.1 * bump, flow, small_grid)
        assert competitor >= best - 1e-12


def test_g1_constraint_residual_refines_at_first_order():
    residuals = []
    for n in (100, 200, 400):
        grid = Grid(nx=n, nt=n)
        f0, f1 = _signals(grid)
        v = _velocity(grid)
        f, z = g1_solve(v, f0, f1, grid)
        residuals.append(constraint_residual(Path(f=f, v=v, z=z), grid))
    assert residuals[0] > residuals[1] > residuals[2]
    assert np.log2(residuals[0] / residuals[2]) / 2 >= 0.8


def test_rk4_and_conservation_routes_solve_g1(small_grid):
    f0, f1 = _signals(small_grid)
    v = _velocity(small_grid)
    for method, jacobian in (("rk4", "exponential"), ("euler", "conservation")):
        f, z = g1_solve(v, f0, f1, small_grid, method=method, jacobian=jacobian)
        assert np.array_equal(f[0], f0) and np.array_equal(f[-1], f1)
        assert np.all(np.isfinite(z))
