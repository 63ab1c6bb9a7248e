"""
Analysis services: the epsilon = 0 degeneracy constructions and a-priori
bound checks for computed geodesics.

Degeneracy arithmetic uses unit weight on v^2, `lam` on v_x^2, no curvature
term and no one-half prefactor.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from core.action import action, h2_norm, l2_norm, integrate_xt
from core.grid import ActionBreakdown, Grid, GridError, HVParams, Path
from core.invariances import periodic_index
from services.flow import FlowField

logger = logging.getLogger(__name__)

BOUND_SLACK = 1.05


def degeneracy_params(lam: float) -> HVParams:
    return HVParams(kappa=1.0, lambda_=lam, epsilon=0.0)


def degeneracy_action(path: Path, lam: float, grid: Grid) -> ActionBreakdown:
    return action(path, degeneracy_params(lam), grid, prefactor=1.0)


def competitor_bound(H: float, s: float, lam: float) -> float:
    """Upper bound 6 s H^2 + 3 (1-2s)^2 (1 + lam/s^2) on the competitor's action."""
    return 6.0 * s * H**2 + 3.0 * (1.0 - 2.0 * s) ** 2 * (1.0 + lam / s**2)


def competitor_exact(H: float, s: float, lam: float) -> float:
    """Exact action of the three-phase competitor path.

    The fill phases cost 6 s H^2. During transport the Eulerian velocity
    integrates to (1-2s)^2 and its gradient to 2a ln((1-s)/s) with a = 3(1-2s).
    """
    a = 3.0 * (1.0 - 2.0 * s)
    return 6.0 * s * H**2 + (1.0 - 2.0 * s) ** 2 + 2.0 * lam * a * math.log((1.0 - s) / s)


def competitor_beats_linear(H: float, s: float, lam: float) -> bool:
    """Sufficient condition s < 1/6 and H^2 > 3(1-2s)^2(1+lam/s^2)/(1-6s)."""
    return s < 1.0 / 6.0 and H**2 > 3.0 * (1.0 - 2.0 * s) ** 2 * (1.0 + lam / s**2) / (1.0 - 6.0 * s)


def competitor_path(H: float, s: float, grid: Grid) -> Path:
    """Fill a step of height H on [0,s], slide its edge to 1-s, then fill the rest.

    Phase boundaries snap to the grid times nearest 1/3 and 2/3, and s snaps to
    the nearest node. The edge moves with the tent velocity, piecewise linear
    with peak at the edge; each trajectory travels in a straight line so the
    Eulerian velocity is sampled exactly from the trajectory positions.
    """
    if not 0.0 < s < 0.5:
        raise GridError(f"s must lie in (0, 1/2), got {s}")
    if grid.nx * s < 2:
        raise GridError(f"grid too coarse for s={s}: need nx*s >= 2, got nx={grid.nx}")
    j1 = int(round(grid.nt / 3.0))
    j2 = int(round(2.0 * grid.nt / 3.0))
    if not 0 < j1 < j2 < grid.nt:
        raise GridError(f"nt={grid.nt} cannot separate three phases")

    x, t = grid.x, grid.t
    i_s = int(round(s * grid.nx))
    s_eff = x[i_s]
    t1, t2 = t[j1], t[j2]
    duration = t2 - t1
    speed = (1.0 - 2.0 * s_eff) / duration

    step_start = np.where(np.arange(grid.nx + 1) <= i_s, H, 0.0)
    step_end = np.where(np.arange(grid.nx + 1) <= grid.nx - i_s, H, 0.0)
    tent = np.where(x <= s_eff, speed * x / s_eff, speed * (1.0 - x) / (1.0 - s_eff))

    f = np.empty(grid.shape)
    v = np.zeros(grid.shape)
    z = np.zeros(grid.shape)
    for j in range(grid.nt + 1):
        if j < j1:
            f[j] = step_start * t[j] / t1
            z[j] = step_start / t1
        elif j < j2:
            elapsed = t[j] - t1
            positions = x + tent * elapsed
            v[j] = np.interp(x, positions, tent)
            edge = s_eff + speed * elapsed
            f[j] = np.where(x <= edge + 1e-12, H, 0.0)
        else:
            fraction = (t[j] - t2) / (1.0 - t2)
            f[j] = step_end + fraction * (H - step_end)
            z[j] = (H - step_end) / (1.0 - t2)
    v[:, 0] = v[:, -1] = 0.0
    return Path(f=f, v=v, z=z)


def halving_path(path: Path) -> Path:
    """Two copies of the path squeezed into halves: f(2x), v(2x)/2, z(2x) (x mod 1)."""
    nx = path.shape[1] - 1
    if nx % 2:
        raise GridError(f"halving needs an even nx, got {nx}")
    idx = periodic_index(nx, 2)
    return Path(f=path.f[:, idx], v=0.5 * path.v[:, idx], z=path.z[:, idx])


def coarsen(path: Path) -> Path:
    """Every other spatial node; the halved path on the fine grid is two copies of this."""
    return Path(f=path.f[:, ::2], v=path.v[:, ::2], z=path.z[:, ::2])


def halving_identity_rhs(path: Path, lam: float, grid: Grid) -> float:
    """Integral of v^2/4 + lam v_x^2 + z^2 for the path sampled on the halved grid."""
    coarse_grid = Grid(nx=grid.nx // 2, nt=grid.nt)
    params = HVParams(kappa=0.25, lambda_=lam, epsilon=0.0)
    return action(coarsen(path), params, coarse_grid, prefactor=1.0).total


@dataclass
class BoundReport:
    v_norm: float
    b: float
    energy_ok: bool
    jac_ok: bool
    dphi_ok: bool
    margins: Dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.energy_ok and self.jac_ok and self.dphi_ok

    def as_dict(self) -> Dict:
        return {
            "v_norm": self.v_norm,
            "b": self.b,
            "energy_ok": self.energy_ok,
            "jac_ok": self.jac_ok,
            "dphi_ok": self.dphi_ok,
            "margins": dict(self.margins),
        }


def bound_report(path: Path, flow: FlowField, grid: Grid) -> BoundReport:
    """Check energy, Jacobian and DPhi bounds with 5% slack.

    Margins are bound/observed ratios (values >= 1/1.05 pass).
    """
    v_norm = h2_norm(path.v, grid)
    b = math.exp(math.sqrt(2.0) * v_norm)

    # energy: max_t ||f(t)|| <= b (||f0|| + ||z||)
    peak_energy = max(l2_norm(row, grid) for row in path.f)
    z_norm = math.sqrt(integrate_xt(path.z**2, grid))
    energy_bound = b * (l2_norm(path.f[0], grid) + z_norm)
    energy_margin = energy_bound / peak_energy if peak_energy > 0 else math.inf

    # 1/b <= J <= b
    jac_upper = b / flow.jac.max()
    jac_lower = flow.jac.min() * b
    jac_margin = min(jac_upper, jac_lower)

    # exp(-sqrt(2t)|v|) <= DPhi <= exp(sqrt(2t)|v|), row by row
    growth = np.exp(np.sqrt(2.0 * grid.t) * v_norm)[:, None]
    dphi_margin = float(min((growth / flow.dphi).min(), (flow.dphi * growth).min()))

    threshold = 1.0 / BOUND_SLACK
    report = BoundReport(
        v_norm=v_norm,
        b=b,
        energy_ok=energy_margin >= threshold,
        jac_ok=jac_margin >= threshold,
        dphi_ok=dphi_margin >= threshold,
        margins={"energy": energy_margin, "jac": jac_margin, "dphi": dphi_margin},
    )
    if not report.ok:
        logger.warning(f"⚠ a-priori bound violated: {report.margins}")
    return report
