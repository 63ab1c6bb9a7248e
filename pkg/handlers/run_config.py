# handlers/run_config.py
"""
Validated run configuration shared by every command handler.
"""
import logging
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, PositiveInt, model_validator

from core.grid import Grid, HVParams
from services.flow import INTEGRATORS, JACOBIAN_ROUTES
from services.optimizer import SolveOptions
from services.parameters import HeuristicInput, estimate_params

logger = logging.getLogger(__name__)

Command = Literal[
    "solve", "distance", "distance-matrix", "estimate-params", "frames", "demo-degeneracy", "experiment",
]

DEFAULT_NT = 100

_PAIR_COMMANDS = {"solve", "distance", "frames"}
_WEIGHTED_COMMANDS = _PAIR_COMMANDS | {"distance-matrix"}


class RunConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    command: Command
    inputs: List[Path] = Field(default_factory=list)

    # metric: explicit weights or the H/W/L heuristic
    kappa: Optional[PositiveFloat] = None
    lambda_: Optional[NonNegativeFloat] = Field(default=None, alias="lambda")
    epsilon: Optional[NonNegativeFloat] = None
    H: Optional[PositiveFloat] = None
    W: Optional[PositiveFloat] = None
    L: Optional[PositiveFloat] = None

    # mesh; nx=None resamples to the longest input
    nx: Optional[int] = Field(default=None, ge=4)
    nt: Optional[PositiveInt] = None

    # solver
    kmax: int = Field(default=3, ge=0)
    max_iters: PositiveInt = 200
    tol: Optional[PositiveFloat] = None
    search_iters: Optional[PositiveInt] = None
    refine: bool = False
    damped: bool = True
    match_minima: bool = True
    smooth: bool = False
    integrator: str = "euler"
    jacobian: str = "exponential"
    workers: Optional[PositiveInt] = None
    seed: Optional[int] = None  # reserved

    out: Path = Path("out")

    # frames
    frames: int = Field(default=11, ge=2)
    times: Optional[List[float]] = None

    # demo-degeneracy
    demo_H: List[PositiveFloat] = Field(default_factory=lambda: [23.0])
    demo_s: List[PositiveFloat] = Field(default_factory=lambda: [0.1])
    demo_lambda: List[NonNegativeFloat] = Field(default_factory=lambda: [1.0])

    # experiment
    experiment: Optional[str] = None
    ratio: Optional[PositiveFloat] = None
    crossover: bool = False

    @model_validator(mode="after")
    def _check_command(self) -> "RunConfig":
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        if self.jacobian not in JACOBIAN_ROUTES:
            raise ValueError(f"jacobian must be one of {JACOBIAN_ROUTES}, got {self.jacobian!r}")

        n = len(self.inputs)
        if self.command in _PAIR_COMMANDS and n != 2:
            raise ValueError(f"{self.command} needs exactly two input signals, got {n}")
        if self.command == "distance-matrix" and n < 2:
            raise ValueError(f"distance-matrix needs at least two input signals, got {n}")

        if self.command in _WEIGHTED_COMMANDS:
            explicit = self.kappa is not None
            heuristic = None not in (self.H, self.W, self.L)
            if explicit == heuristic:
                raise ValueError("give either --kappa (with --lambda/--epsilon) or all of --H, --W, --L")
            if explicit and not self.epsilon:
                raise ValueError("epsilon must be positive for a geodesic solve")

        if self.command == "estimate-params":
            if self.W is None or self.L is None:
                raise ValueError("estimate-params needs --W and --L")
            if self.H is None and n < 2:
                raise ValueError("estimate-params needs --H or at least two --dataset signals")

        if self.command == "demo-degeneracy":
            if not len(self.demo_H) == len(self.demo_s) == len(self.demo_lambda):
                raise ValueError("demo-degeneracy needs the same number of H, s and lambda values")

        if self.command == "experiment" and not self.experiment:
            raise ValueError("experiment needs a name")
        return self

    def heuristic(self, H: Optional[float] = None) -> HeuristicInput:
        return HeuristicInput(H=H if H is not None else self.H, W=self.W, L=self.L)

    def hv_params(self) -> HVParams:
        if self.kappa is not None:
            return HVParams(self.kappa, self.lambda_ or 0.0, self.epsilon or 0.0)
        return estimate_params(self.heuristic())

    def grid(self, nx: int) -> Grid:
        return Grid(nx=nx, nt=self.nt or DEFAULT_NT)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(
            max_iters=self.max_iters,
            tol=self.tol,
            k_max=self.kmax,
            damped=self.damped,
            match_minima=self.match_minima,
            refine=self.refine,
            search_iters=self.search_iters,
            smooth=self.smooth,
            integrator=self.integrator,
            jacobian=self.jacobian,
            max_workers=self.workers,
        )
