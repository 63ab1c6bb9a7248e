"""
Grid, path and action evaluator checks, plus the metric invariances.
"""
import numpy as np
import pytest
from scipy.integrate import trapezoid

from core.action import action, constraint_residual, d2dx2, ddx
from core.grid import DimensionError, Grid, GridError, HVParams, Path
from core.invariances import amplitude_scale, negate, periodic_index, shift, space_rescale


def test_grid_validation():
    with pytest.raises(GridError):
        Grid(nx=3, nt=10)
    with pytest.raises(GridError):
        Grid(nx=10, nt=0)
    grid = Grid(nx=8, nt=4)
    assert grid.shape == (5, 9)
    assert grid.dx == pytest.approx(0.125)
    assert grid.x[-1] == 1.0 and grid.t[-1] == 1.0


def test_params_validation():
    with pytest.raises(GridError):
        HVParams(kappa=0.0)
    with pytest.raises(GridError):
        HVParams(kappa=1.0, lambda_=-1.0)
    with pytest.raises(GridError):
        HVParams(kappa=1.0, epsilon=float("nan"))
    assert HVParams(1.0, 2.0, 3.0).scaled(2.0, 3.0, 4.0) == HVParams(2.0, 6.0, 12.0)


def test_path_is_read_only_and_checked(small_grid):
    v = np.zeros(small_grid.shape)
    v[3, 0] = 1.0
    path = Path(f=np.zeros(small_grid.shape), v=v, z=np.zeros(small_grid.shape))
    with pytest.raises(ValueError):
        path.f[0, 0] = 1.0
    with pytest.raises(DimensionError):
        path.check(small_grid)
    with pytest.raises(DimensionError):
        Path(f=np.zeros((3, 4)), v=np.zeros((3, 5)), z=np.zeros((3, 4)))


def test_unit_source_has_half_action(small_grid, params):
    path = Path(f=np.zeros(small_grid.shape), v=np.zeros(small_grid.shape), z=np.ones(small_grid.shape))
    result = action(path, params, small_grid)
    assert result.total == pytest.approx(0.5, rel=1e-14)
    assert result.kinetic_v == result.grad_v == result.curv_v == 0.0


def test_linear_path_oracle(rng):
    grid = Grid(nx=200, nt=100)
    f0, f1 = rng.normal(size=grid.nx + 1), rng.normal(size=grid.nx + 1)
    path = Path.linear(f0, f1, grid)
    expected = 0.5 * trapezoid((f1 - f0) ** 2, dx=grid.dx)
    assert action(path, HVParams(1.0, 1.0, 1.0), grid).total == pytest.approx(expected, rel=1e-12)
    assert constraint_residual(path, grid) < 1e-10
    path.check(grid, f0, f1)


def test_breakdown_sums_to_total(random_path, small_grid):
    result = action(random_path(small_grid), HVParams(0.3, 0.2, 0.1), small_grid)
    parts = [result.kinetic_v, result.grad_v, result.curv_v, result.vertical_z]
    assert all(p >= 0 for p in parts)
    assert result.total == sum(parts)


def test_sine_velocity_action_converges_at_second_order():
    exact = 0.5 * (0.5 + np.pi**2 / 2 + np.pi**4 / 2)
    errors = []
    for nx in (50, 100, 200):
        grid = Grid(nx=nx, nt=4)
        v = np.broadcast_to(np.sin(np.pi * grid.x), grid.shape).copy()
        v[:, -1] = 0.0
        path = Path(f=np.zeros(grid.shape), v=v, z=np.zeros(grid.shape))
        errors.append(abs(action(path, HVParams(1.0, 1.0, 1.0), grid).total - exact))
    assert errors[0] > errors[1] > errors[2]
    assert np.log2(errors[1] / errors[2]) >= 1.8


def test_ghost_points_reproduce_odd_second_derivative():
    grid = Grid(nx=64, nt=1)
    v = np.sin(np.pi * grid.x)
    discrete = d2dx2(v, grid.dx)
    assert np.allclose(discrete, -(np.pi**2) * v, atol=5e-3)
    assert np.allclose(ddx(grid.x, grid.dx), 1.0)


def test_constraint_residual_cases(random_path, small_grid):
    f = np.full(small_grid.shape, 2.5)
    zero = np.zeros(small_grid.shape)
    assert constraint_residual(Path(f=f, v=zero, z=zero), small_grid) == 0.0
    assert constraint_residual(random_path(small_grid), small_grid) > 0.0


def test_negate_and_shift_preserve_action(random_path, small_grid, params):
    path = random_path(small_grid)
    base = action(path, params, small_grid).total
    twice = negate(negate(path))
    assert np.array_equal(twice.f, path.f) and np.array_equal(twice.z, path.z)
    assert action(negate(path), params, small_grid).total == pytest.approx(base, rel=1e-12)
    assert action(shift(path, 3.7), params, small_grid).total == pytest.approx(base, rel=1e-12)


def test_amplitude_scaling(random_path, small_grid, params):
    path = random_path(small_grid)
    c = 1.7
    scaled = action(amplitude_scale(path, c), params.scaled(c**2, c**2, c**2), small_grid).total
    assert scaled == pytest.approx(c**2 * action(path, params, small_grid).total, rel=1e-12)
    with pytest.raises(GridError):
        amplitude_scale(path, 0.0)


def test_space_rescale_matches_scaled_weights():
    grid = Grid(nx=400, nt=10)
    x, t = grid.x[None, :], grid.t[:, None]
    v = 0.2 * np.sin(2 * np.pi * x) * (1.0 + t)
    v[:, 0] = v[:, -1] = 0.0
    f = np.cos(2 * np.pi * x) * (1.0 - 0.5 * t)
    z = (1.0 + np.cos(2 * np.pi * x)) * np.ones_like(t)
    path = Path(f=f, v=v, z=z)

    params = HVParams(0.3, 0.05, 0.01)
    L = 2
    rescaled = space_rescale(path, L)
    weights = params.scaled(L**2, 1.0, 1.0 / L**2)
    assert action(rescaled, weights, grid).total == pytest.approx(action(path, params, grid).total, rel=2e-2)
    assert np.all(rescaled.v[:, 0] == 0.0) and np.all(rescaled.v[:, -1] == 0.0)


def test_periodic_index():
    assert periodic_index(8, 2).tolist() == [0, 2, 4, 6, 8, 2, 4, 6, 8]
    with pytest.raises(GridError):
        periodic_index(9, 2)
