"""
Metric weights from data length scales.

H is the typical vertical variation, W the typical feature width and L the
largest horizontal distance between features that should be matched by
transport. The rule respects the scaling invariances of the distance.
"""
import logging
from typing import Sequence

import numpy as np
from pydantic import BaseModel, PositiveFloat

from core.action import l2_norm
from core.grid import Grid, GridError, HVParams

logger = logging.getLogger(__name__)


class HeuristicInput(BaseModel):
    H: PositiveFloat
    W: PositiveFloat
    L: PositiveFloat


def estimate_params(heuristic: HeuristicInput) -> HVParams:
    """kappa = 0.01 H^2/L^2, lambda = 0.02 H^2, epsilon = 0.2 H^2 W^2."""
    h2 = heuristic.H**2
    params = HVParams(
        kappa=0.01 * h2 / heuristic.L**2,
        lambda_=0.02 * h2,
        epsilon=0.2 * h2 * heuristic.W**2,
    )
    logger.info(f"estimated weights {params.as_dict()} from H={heuristic.H}, W={heuristic.W}, L={heuristic.L}")
    return params


def dataset_height(signals: Sequence[np.ndarray], grid: Grid) -> float:
    """Typical L2 distance between signals: H^2 = (2/n) sum ||f_i||^2 - 2 ||mean f||^2."""
    if len(signals) < 2:
        raise GridError("dataset mode needs at least two signals")
    stack = np.vstack([grid.check_signal(s, f"signal {i}") for i, s in enumerate(signals)])
    n = stack.shape[0]
    h2 = 2.0 / n * sum(l2_norm(row, grid) ** 2 for row in stack) - 2.0 * l2_norm(stack.mean(axis=0), grid) ** 2
    return float(np.sqrt(max(h2, 0.0)))
