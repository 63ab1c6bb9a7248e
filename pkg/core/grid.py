"""
core/grid.py: Space-time mesh, metric weights and the discrete path triple.

Everything here is an immutable value object; arrays are copied on the way in
and flagged read-only so instances can be shared between worker threads.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)


class HVError(Exception):
    """Base class for every error raised by the geodesic toolkit."""


class GridError(HVError, ValueError):
    """Raised when a mesh or a parameter set is malformed."""


class DimensionError(HVError, ValueError):
    """Raised when an array does not match the grid it is used with."""


def _frozen(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform mesh with nx spatial and nt time intervals on [0,1]x[0,1]."""

    nx: int
    nt: int

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.nt) != self.nt:
            raise GridError(f"grid sizes must be integers, got nx={self.nx}, nt={self.nt}")
        if self.nx < 4:
            raise GridError(f"nx must be at least 4 for the fourth-order stencil, got {self.nx}")
        if self.nt < 1:
            raise GridError(f"nt must be at least 1, got {self.nt}")

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    @property
    def dt(self) -> float:
        return 1.0 / self.nt

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx + 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nt + 1)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nt + 1, self.nx + 1)

    def check_signal(self, values, name: str = "signal") -> np.ndarray:
        """Return `values` as a float array of length nx+1 or raise."""
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (self.nx + 1,):
            raise DimensionError(f"{name} has shape {arr.shape}, expected ({self.nx + 1},)")
        if not np.all(np.isfinite(arr)):
            raise DimensionError(f"{name} contains non-finite entries")
        return arr

    def check_field(self, values, name: str = "field") -> np.ndarray:
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != self.shape:
            raise DimensionError(f"{name} has shape {arr.shape}, expected {self.shape}")
        if not np.all(np.isfinite(arr)):
            raise DimensionError(f"{name} contains non-finite entries")
        return arr

    def as_dict(self) -> Dict[str, int]:
        return {"nx": self.nx, "nt": self.nt}


@dataclass(frozen=True)
class HVParams:
    """Metric weights: kappa on v^2, lambda on v_x^2, epsilon on v_xx^2."""

    kappa: float
    lambda_: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "lambda_", "epsilon"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise GridError(f"{name.rstrip('_')} must be finite, got {value}")
        if self.kappa <= 0:
            raise GridError(f"kappa must be positive, got {self.kappa}")
        if self.lambda_ < 0:
            raise GridError(f"lambda must be nonnegative, got {self.lambda_}")
        if self.epsilon < 0:
            raise GridError(f"epsilon must be nonnegative, got {self.epsilon}")

    def scaled(self, kappa: float = 1.0, lambda_: float = 1.0, epsilon: float = 1.0) -> "HVParams":
        """Multiply each weight by its own factor."""
        return HVParams(self.kappa * kappa, self.lambda_ * lambda_, self.epsilon * epsilon)

    def as_dict(self) -> Dict[str, float]:
        return {"kappa": self.kappa, "lambda": self.lambda_, "epsilon": self.epsilon}


@dataclass(frozen=True)
class Path:
    """Discrete admissible-path candidate (f, v, z), each (nt+1) x (nx+1)."""

    f: np.ndarray
    v: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        f = _frozen(self.f, "f")
        v = _frozen(self.v, "v")
        z = _frozen(self.z, "z")
        if f.ndim != 2 or f.shape != v.shape or f.shape != z.shape:
            raise DimensionError(
                f"path fields must share one 2-D shape, got f{f.shape} v{v.shape} z{z.shape}"
            )
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "z", z)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.f.shape

    def check(self, grid: Grid, f0: Optional[np.ndarray] = None, f1: Optional[np.ndarray] = None,
              atol: float = 0.0) -> None:
        """Validate shape, the v boundary condition and optionally the pinned endpoints."""
        if self.shape != grid.shape:
            raise DimensionError(f"path shape {self.shape} does not match grid {grid.shape}")
        if np.any(np.abs(self.v[:, 0]) > atol) or np.any(np.abs(self.v[:, -1]) > atol):
            raise DimensionError("v must vanish at x=0 and x=1")
        if f0 is not None and not np.allclose(self.f[0], f0, rtol=0.0, atol=atol):
            raise DimensionError("f[0] is not pinned to the source signal")
        if f1 is not None and not np.allclose(self.f[-1], f1, rtol=0.0, atol=atol):
            raise DimensionError("f[nt] is not pinned to the target signal")

    def blend(self, other: "Path", alpha: float) -> "Path":
        """Componentwise convex combination (1-alpha)*self + alpha*other."""
        if other.shape != self.shape:
            raise DimensionError(f"cannot blend paths of shape {self.shape} and {other.shape}")
        if alpha == 0.0:
            return self
        if alpha == 1.0:
            return other
        return Path(
            f=(1.0 - alpha) * self.f + alpha * other.f,
            v=(1.0 - alpha) * self.v + alpha * other.v,
            z=(1.0 - alpha) * self.z + alpha * other.z,
        )

    @classmethod
    def linear(cls, f0: np.ndarray, f1: np.ndarray, grid: Grid) -> "Path":
        """Zero-velocity path: f linear in t, z = f1 - f0."""
        f0 = grid.check_signal(f0, "f0")
        f1 = grid.check_signal(f1, "f1")
        t = grid.t[:, None]
        f = (1.0 - t) * f0[None, :] + t * f1[None, :]
        f[0], f[-1] = f0, f1
        return cls(f=f, v=np.zeros(grid.shape), z=np.broadcast_to(f1 - f0, grid.shape))


@dataclass(frozen=True)
class ActionBreakdown:
    total: float
    kinetic_v: float
    grad_v: float
    curv_v: float
    vertical_z: float

    def as_dict(self) -> Dict[str, float]:
        return {
            "total": self.total,
            "kinetic_v": self.kinetic_v,
            "grad_v": self.grad_v,
            "curv_v": self.curv_v,
            "vertical_z": self.vertical_z,
        }
