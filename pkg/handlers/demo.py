# handlers/demo.py
"""
The epsilon = 0 degeneracy demo: a transport competitor that beats the
linear path between two constants, and the halving construction that keeps
lowering the action.
"""
import logging
from typing import Dict, List

import click

from core.grid import Grid
from handlers.run_config import RunConfig
from services.analysis import (
    competitor_beats_linear,
    competitor_bound,
    competitor_exact,
    competitor_path,
    degeneracy_action,
    halving_path,
)
from utils.formatter import format_degeneracy_table, format_halving

logger = logging.getLogger(__name__)

DEMO_NX = 300
DEMO_NT = 90


def degeneracy_rows(config: RunConfig) -> List[Dict]:
    grid = Grid(nx=config.nx or DEMO_NX, nt=config.nt or DEMO_NT)
    rows = []
    for H, s, lam in zip(config.demo_H, config.demo_s, config.demo_lambda):
        path = competitor_path(H, s, grid)
        discrete = degeneracy_action(path, lam, grid).total
        row = {
            "H": H,
            "s": s,
            "lambda": lam,
            "linear": H**2,
            "bound": competitor_bound(H, s, lam),
            "exact": competitor_exact(H, s, lam),
            "discrete": discrete,
            "sufficient": competitor_beats_linear(H, s, lam),
        }
        if grid.nx % 2 == 0:
            row["halved"] = degeneracy_action(halving_path(path), lam, grid).total
        logger.info(f"degeneracy H={H} s={s} λ={lam}: discrete={discrete:.6g} linear={H**2:.6g}")
        rows.append(row)
    return rows


def run_demo(config: RunConfig) -> int:
    rows = degeneracy_rows(config)
    click.echo(format_degeneracy_table(rows))
    for row in rows:
        if "halved" in row:
            click.echo(format_halving(row["discrete"], row["halved"]))
    return 0
