import numpy as np
import pytest

from core.grid import Grid, HVParams, Path


def bumps(x, centers, widths, heights):
    out = np.zeros_like(x)
    for c, w, h in zip(centers, widths, heights):
        out += h * np.exp(-(((x - c) / w) ** 2))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


@pytest.fixture
def small_grid():
    return Grid(nx=40, nt=20)


@pytest.fixture
def params():
    return HVParams(kappa=0.1, lambda_=0.01, epsilon=0.001)


@pytest.fixture
def smooth_signal(rng):
    """Factory for random smooth signals on a grid: a few Gaussian bumps."""

    def make(grid, count=2):
        centers = rng.uniform(0.2, 0.8, size=count)
        widths = rng.uniform(0.06, 0.12, size=count)
        heights = rng.uniform(-1.0, 1.0, size=count)
        return bumps(grid.x, centers, widths, heights)

    return make


@pytest.fixture
def random_path(rng):
    """Factory for random (f, v, z) fields with v pinned to zero at both walls."""
    def make(grid):
        f = rng.normal(size=grid.shape)
        v = rng.normal(size=grid.shape)
        v[:, 0] = v[:, -1] = 0.0
        z = rng.normal(size=grid.shape)
        return Path(f=f, v=v, z=z)

    return make
