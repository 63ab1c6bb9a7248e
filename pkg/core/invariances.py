"""
core/invariances.py: Path transforms under which the action is invariant
(or scales in a known way). Each maps admissible paths to admissible paths.
"""
import logging

import numpy as np

from core.grid import GridError, Path

logger = logging.getLogger(__name__)


def negate(path: Path) -> Path:
    return Path(f=-path.f, v=path.v, z=-path.z)


def shift(path: Path, c: float) -> Path:
    return Path(f=path.f + c, v=path.v, z=path.z)


def amplitude_scale(path: Path, c: float) -> Path:
    """(f, v, z) -> (c f, v, c z); the action scales by c^2 when all weights do."""
    if not c > 0:
        raise GridError(f"amplitude scale must be positive, got {c}")
    return Path(f=c * path.f, v=path.v, z=c * path.z)


def periodic_index(nx: int, factor: int) -> np.ndarray:
    """Node indices sampling the periodic extension of a row at factor * x.

    Each of the `factor` copies spans nx/factor intervals; a node landing on a
    copy boundary (other than x=0) takes the right end of the preceding copy.
    """
    if factor < 1 or nx % factor:
        raise GridError(f"nx={nx} is not divisible by {factor}")
    idx = (factor * np.arange(nx + 1)) % nx
    idx[1:][idx[1:] == 0] = nx
    return idx


def space_rescale(path: Path, L: int) -> Path:
    """Compress L periodic copies of the path into [0,1].

    f and z are resampled as f(Lx, t); v becomes v(Lx, t)/L so that the
    transport constraint still holds. With weights (L^2 kappa, lambda, epsilon/L^2)
    the action is preserved up to quadrature error whenever the periodic
    extension of the path is smooth.
    """
    if int(L) != L or L < 1:
        raise GridError(f"rescale factor must be a positive integer, got {L}")
    nx = path.shape[1] - 1
    idx = periodic_index(nx, int(L))
    return Path(f=path.f[:, idx], v=path.v[:, idx] / L, z=path.z[:, idx])
