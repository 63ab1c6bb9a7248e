# handlers/experiment.py
import json
import logging

import click

from core.grid import Grid
from handlers.run_config import RunConfig
from handlers.solve import geodesic_report, write_geodesic
from services.experiments import DEFAULT_GRID, get_experiment, two_bump, two_bump_crossover
from services.optimizer import solve
from utils.formatter import format_params, format_result
from utils.helpers import even_times, frame_rows
from utils.signal_io import write_frames, write_signal

logger = logging.getLogger(__name__)


def _grid(config: RunConfig) -> Grid:
    return Grid(nx=config.nx or DEFAULT_GRID.nx, nt=config.nt or DEFAULT_GRID.nt)


def run_experiment(config: RunConfig) -> int:
    grid = _grid(config)
    if config.crossover:
        return _run_crossover(config, grid)

    if config.experiment == "two-bump" and config.ratio is not None:
        exp = two_bump(config.ratio, grid)
    else:
        exp = get_experiment(config.experiment, grid)
    logger.info(f"experiment {exp.name}: {exp.description}; {format_params(exp.params)}")

    result = solve(exp.f0, exp.f1, exp.params, grid, config.solve_options())
    report = geodesic_report(result, exp.params, grid, config)
    report["experiment"] = exp.name
    out = config.out / exp.name
    write_geodesic(out, result, report)
    write_signal(out / "f0.csv", exp.f0, grid.x)
    write_signal(out / "f1.csv", exp.f1, grid.x)

    times = config.times if config.times else even_times(config.frames)
    write_frames(out / "frames.csv", times, frame_rows(result.path.f, grid, times))
    click.echo(format_result(report))
    return 0


def _run_crossover(config: RunConfig, grid: Grid) -> int:
    if config.experiment != "two-bump":
        raise click.UsageError("--crossover applies to the two-bump experiment only")
    found = two_bump_crossover(grid=grid, opts=config.solve_options())
    pair = found.pair
    summary = {
        "ratio": found.ratio,
        "vertical_action": pair.vertical.action.total,
        "transport_action": pair.transport.action.total,
        "relative_gap": pair.gap,
        "separation": pair.separation(grid),
        "history": [list(step) for step in found.history],
    }
    config.out.mkdir(parents=True, exist_ok=True)
    (config.out / "crossover.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    click.echo(
        f"crossover near ratio {found.ratio:.4f}: vertical {summary['vertical_action']:.6g}, "
        f"transport {summary['transport_action']:.6g} (gap {pair.gap:+.2%})"
    )
    return 0
