# handlers/solve.py
import json
import logging
from pathlib import Path
from typing import Dict, List, Tuple

import click
import numpy as np

from core.grid import Grid, HVParams
from handlers.run_config import RunConfig
from services.analysis import bound_report
from services.flow import integrate_flow
from services.optimizer import GeodesicResult, solve
from utils.formatter import format_params, format_result
from utils.helpers import common_nx, even_times, frame_rows
from utils.signal_io import load_signal, native_length, write_field, write_frames

logger = logging.getLogger(__name__)


def load_inputs(config: RunConfig) -> Tuple[List[np.ndarray], Grid]:
    """Read every input on one grid; unequal lengths resample to the longest."""
    nx = common_nx([native_length(p) for p in config.inputs], config.nx)
    grid = config.grid(nx)
    signals = [load_signal(p, nx) for p in config.inputs]
    return signals, grid


def geodesic_report(result: GeodesicResult, params: HVParams, grid: Grid, config: RunConfig) -> Dict:
    """Summary plus the run settings and the a-priori bound check."""
    report = result.summary()
    report["k_label"] = f"k={result.k_selected}" + (" (minima)" if result.minima else "")
    report["params"] = params.as_dict()
    report["grid"] = grid.as_dict()
    report["inputs"] = [str(p) for p in config.inputs]
    flow = integrate_flow(result.path.v, grid, method=config.integrator, jacobian=config.jacobian)
    report["bounds"] = bound_report(result.path, flow, grid).as_dict()
    return report


def write_geodesic(out: Path, result: GeodesicResult, report: Dict):
    out.mkdir(parents=True, exist_ok=True)
    write_field(out / "f.csv", result.path.f)
    write_field(out / "v.csv", result.path.v)
    write_field(out / "z.csv", result.path.z)
    (out / "report.json").write_text(json.dumps(report, indent=2), encoding="utf-8")
    logger.info(f"✅ geodesic written to {out}")


def _solve_pair(config: RunConfig) -> Tuple[GeodesicResult, HVParams, Grid]:
    (f0, f1), grid = load_inputs(config)
    params = config.hv_params()
    logger.info(f"{config.command}: {format_params(params)} on {grid.nx}x{grid.nt}")
    return solve(f0, f1, params, grid, config.solve_options()), params, grid


def run_solve(config: RunConfig) -> int:
    result, params, grid = _solve_pair(config)
    report = geodesic_report(result, params, grid, config)
    write_geodesic(config.out, result, report)
    click.echo(format_result(report))
    return 0


def run_distance(config: RunConfig) -> int:
    result, _, _ = _solve_pair(config)
    click.echo(f"{result.distance:.17g}")
    return 0


def run_frames(config: RunConfig) -> int:
    result, _, grid = _solve_pair(config)
    times = config.times if config.times else even_times(config.frames)
    frames = frame_rows(result.path.f, grid, times)
    config.out.mkdir(parents=True, exist_ok=True)
    target = config.out / "frames.csv"
    write_frames(target, times, frames)
    click.echo(f"{len(frames)} frame(s) written to {target}")
    return 0
