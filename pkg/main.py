"""
main.py: HV geodesic toolkit entry point.

Exit codes: 0 success, 1 usage, 2 solver failure, 3 I/O.
"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import click
from dotenv import load_dotenv
from pydantic import ValidationError

# Load environment variables first, before any local imports
load_dotenv(dotenv_path=Path('.') / '.env')

from core.config import load_config, validate_config
from core.grid import DimensionError, GridError, HVError
from core.logging_config import configure_logging
from handlers.demo import run_demo
from handlers.experiment import run_experiment
from handlers.matrix import run_matrix
from handlers.params import run_estimate
from handlers.run_config import RunConfig
from handlers.solve import run_distance, run_frames, run_solve
from services.bvp import DegenerateMetricError
from services.experiments import EXPERIMENTS
from services.flow import INTEGRATORS, JACOBIAN_ROUTES
from utils.signal_io import SignalFormatError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_IO = 3


def _settings(ctx: click.Context) -> Dict[str, Any]:
    return ctx.obj if ctx.obj is not None else load_config()


def _build(ctx: click.Context, command: str, **options) -> RunConfig:
    """RunConfig from flags; unset flags fall back to the environment configuration."""
    settings = _settings(ctx)
    fallbacks = {
        "max_iters": settings["HV_MAX_ITERS"],
        "kmax": settings["HV_KMAX"],
        "workers": settings["HV_MAX_WORKERS"],
        "out": settings["HV_OUTPUT_DIR"],
    }
    for key, value in fallbacks.items():
        if key in options and options[key] is None:
            options[key] = value
    cleaned = {k: v for k, v in options.items() if v is not None}
    return RunConfig(command=command, **cleaned)


def metric_options(fn):
    for decorator in reversed([
        click.option("--kappa", type=float, help="Weight on v^2."),
        click.option("--lambda", "lambda_", type=float, help="Weight on v_x^2."),
        click.option("--epsilon", type=float, help="Weight on v_xx^2 (must be positive)."),
        click.option("--H", "H", type=float, help="Typical vertical variation (heuristic mode)."),
        click.option("--W", "W", type=float, help="Typical feature width (heuristic mode)."),
        click.option("--L", "L", type=float, help="Largest transport distance (heuristic mode)."),
    ]):
        fn = decorator(fn)
    return fn


def solver_options(fn):
    for decorator in reversed([
        click.option("--nx", type=int, help="Spatial intervals (default: longest input)."),
        click.option("--nt", type=int, help="Time intervals."),
        click.option("--kmax", type=int, help="Largest number of matched peaks."),
        click.option("--max-iters", type=int, help="Iteration cap per solve."),
        click.option("--tol", type=float, help="Stop when an iteration improves the action by less."),
        click.option("--search-iters", type=int, help="Iterations per start before refining the best."),
        click.option("--refine/--no-refine", default=False, help="Continue the best start to --max-iters."),
        click.option("--damping/--no-damping", "damped", default=True, help="Back-tracking line search."),
        click.option("--minima/--no-minima", "match_minima", default=True, help="Also match minima."),
        click.option("--smooth", is_flag=True, default=False, help="Central differences in the velocity solve."),
        click.option("--integrator", type=click.Choice(INTEGRATORS), default="euler"),
        click.option("--jacobian", type=click.Choice(JACOBIAN_ROUTES), default="exponential"),
        click.option("--workers", type=int, help="Worker threads."),
        click.option("--seed", type=int, help="Reserved."),
    ]):
        fn = decorator(fn)
    return fn


@click.group()
def cli():
    """Horizontal-vertical geodesic distances between 1-D signals."""


@cli.command()
@click.option("--f0", type=click.Path(path_type=Path), required=True)
@click.option("--f1", type=click.Path(path_type=Path), required=True)
@metric_options
@solver_options
@click.option("--out", type=click.Path(path_type=Path))
@click.pass_context
def solve(ctx, f0, f1, **options):
    """Compute the geodesic and write f.csv, v.csv, z.csv and report.json."""
    return run_solve(_build(ctx, "solve", inputs=[f0, f1], **options))


@cli.command()
@click.option("--f0", type=click.Path(path_type=Path), required=True)
@click.option("--f1", type=click.Path(path_type=Path), required=True)
@metric_options
@solver_options
@click.pass_context
def distance(ctx, f0, f1, **options):
    """Print the distance between two signals."""
    return run_distance(_build(ctx, "distance", inputs=[f0, f1], **options))


@cli.command("distance-matrix")
@click.argument("signals", nargs=-1, type=click.Path(path_type=Path))
@metric_options
@solver_options
@click.option("--out", type=click.Path(path_type=Path))
@click.pass_context
def distance_matrix(ctx, signals, **options):
    """Write the pairwise distance matrix of SIGNALS to distances.csv."""
    return run_matrix(_build(ctx, "distance-matrix", inputs=list(signals), **options))


@cli.command("estimate-params")
@click.option("--H", "H", type=float)
@click.option("--W", "W", type=float)
@click.option("--L", "L", type=float)
@click.option("--dataset", multiple=True, type=click.Path(path_type=Path),
              help="Signals whose spread sets H.")
@click.option("--nx", type=int)
@click.pass_context
def estimate_params(ctx, H, W, L, dataset, nx):
    """Metric weights from length scales."""
    return run_estimate(_build(ctx, "estimate-params", H=H, W=W, L=L, inputs=list(dataset), nx=nx))


@cli.command()
@click.option("--f0", type=click.Path(path_type=Path), required=True)
@click.option("--f1", type=click.Path(path_type=Path), required=True)
@metric_options
@solver_options
@click.option("--frames", type=int, help="Evenly spaced frame count.")
@click.option("--times", type=float, multiple=True, help="Explicit frame times in [0, 1].")
@click.option("--out", type=click.Path(path_type=Path))
@click.pass_context
def frames(ctx, f0, f1, times, **options):
    """Write interpolation frames of the geodesic to frames.csv."""
    return run_frames(_build(ctx, "frames", inputs=[f0, f1], times=list(times) or None, **options))


@cli.command("demo-degeneracy")
@click.option("--H", "demo_H", type=float, multiple=True)
@click.option("--s", "demo_s", type=float, multiple=True)
@click.option("--lambda", "demo_lambda", type=float, multiple=True)
@click.option("--nx", type=int)
@click.option("--nt", type=int)
@click.pass_context
def demo_degeneracy(ctx, demo_H, demo_s, demo_lambda, nx, nt):
    """Competitor-vs-linear action table without the curvature term."""
    options = {"demo_H": list(demo_H), "demo_s": list(demo_s), "demo_lambda": list(demo_lambda)}
    return run_demo(_build(ctx, "demo-degeneracy", nx=nx, nt=nt,
                           **{k: v for k, v in options.items() if v}))


@cli.command()
@click.argument("name", type=click.Choice(sorted(EXPERIMENTS)))
@click.option("--ratio", type=float, help="Small/large bump height (two-bump).")
@click.option("--crossover", is_flag=True, default=False, help="Bisect the two-bump height ratio.")
@solver_options
@click.option("--frames", type=int)
@click.option("--times", type=float, multiple=True)
@click.option("--out", type=click.Path(path_type=Path))
@click.pass_context
def experiment(ctx, name, times, **options):
    """Run a built-in experiment and export its geodesic frames."""
    return run_experiment(_build(ctx, "experiment", experiment=name, times=list(times) or None, **options))


def main(argv: Optional[Sequence[str]] = None) -> int:
    config = load_config()
    if not validate_config(config):
        return EXIT_USAGE
    configure_logging(config["HV_LOG_FILE"], config["HV_LOG_LEVEL"])

    try:
        status = cli.main(args=list(argv) if argv is not None else None, prog_name="hv-geodesic",
                          standalone_mode=False, obj=config)
        return status if isinstance(status, int) else EXIT_OK
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except ValidationError as e:
        click.echo(f"Error: invalid arguments\n{e}", err=True)
        return EXIT_USAGE
    except (GridError, DimensionError, DegenerateMetricError) as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_USAGE
    except (SignalFormatError, OSError) as e:
        logger.error(f"❌ I/O failure: {e}")
        click.echo(f"Error: {e}", err=True)
        return EXIT_IO
    except HVError as e:
        logger.error(f"❌ solver failure: {e}")
        click.echo(f"Error: {e}", err=True)
        return EXIT_SOLVER
    except Exception as e:
        logger.critical(f"❌ Unexpected error: {type(e).__name__}: {e}", exc_info=True)
        click.echo(f"Error: {type(e).__name__}: {e}", err=True)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
