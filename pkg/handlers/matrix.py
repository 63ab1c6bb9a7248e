# handlers/matrix.py
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Dict, Tuple

import click
import numpy as np
from tqdm import tqdm

from core.grid import HVError
from handlers.run_config import RunConfig
from handlers.solve import load_inputs
from services.optimizer import SolveFailedError, solve
from utils.helpers import symmetric_matrix, upper_triangle_pairs
from utils.signal_io import write_field

logger = logging.getLogger(__name__)


def distance_matrix(signals, params, grid, opts, max_workers=None, progress: bool = True) -> np.ndarray:
    """Pairwise distances; each unordered pair is solved once and mirrored."""
    pairs = upper_triangle_pairs(len(signals))
    distances: Dict[Tuple[int, int], float] = {}
    failures: Dict[str, str] = {}

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {
            executor.submit(solve, signals[i], signals[j], params, grid, opts): (i, j)
            for i, j in pairs
        }
        for future in tqdm(as_completed(futures), total=len(futures), desc="pairs", disable=not progress):
            i, j = futures[future]
            try:
                distances[(i, j)] = future.result().distance
            except HVError as e:
                failures[f"({i}, {j})"] = str(e)
                logger.error(f"❌ pair ({i}, {j}) failed: {e}")

    if failures:
        raise SolveFailedError(failures)
    return symmetric_matrix(len(signals), distances)


def run_matrix(config: RunConfig) -> int:
    signals, grid = load_inputs(config)
    params = config.hv_params()
    matrix = distance_matrix(signals, params, grid, config.solve_options(), max_workers=config.workers)

    config.out.mkdir(parents=True, exist_ok=True)
    target = config.out / "distances.csv"
    write_field(target, matrix)
    click.echo(f"{matrix.shape[0]}x{matrix.shape[1]} distance matrix written to {target}")
    return 0
