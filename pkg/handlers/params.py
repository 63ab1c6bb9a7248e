# handlers/params.py
import json
import logging

import click

from handlers.run_config import RunConfig
from handlers.solve import load_inputs
from services.parameters import dataset_height, estimate_params
from utils.formatter import format_params

logger = logging.getLogger(__name__)


def run_estimate(config: RunConfig) -> int:
    """Weights from H, W, L; with dataset signals H is their typical L2 distance."""
    H = config.H
    if H is None:
        signals, grid = load_inputs(config)
        H = dataset_height(signals, grid)
        logger.info(f"dataset height from {len(signals)} signal(s): H={H:.6g}")
    params = estimate_params(config.heuristic(H))
    click.echo(format_params(params))
    click.echo(json.dumps({"H": H, "W": config.W, "L": config.L, **params.as_dict()}))
    return 0
