"""Experiment configs: YAML files validated by pydantic.

Every experiment key is mandatory; only the ``solver`` section may be left out.
"""
import logging
import os
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..config import SolverOptions
from ..core.grid import PathGrid, Segment, TimeGrid, constant_initial, initial_from_nodes
from ..errors import ConfigurationError
from ..models.builtin import builtin
from ..models.spec import ModelSpec
from ..rate.events import EventKind, RareEvent

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "NEUTRAL_LDP_OUTPUT_DIR"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class XiConfig(_Strict):
    kind: Literal["constant", "nodes"]
    value: Optional[Union[float, List[float]]] = None
    nodes: Optional[List[Union[float, List[float]]]] = None

    @model_validator(mode="after")
    def _one_description(self):
        if self.kind == "constant" and self.value is None:
            raise ValueError("xi.kind=constant needs xi.value")
        if self.kind == "nodes" and self.nodes is None:
            raise ValueError("xi.kind=nodes needs xi.nodes")
        return self


class GridConfig(_Strict):
    tau: float = Field(gt=0)
    T: float = Field(gt=0)
    h: float = Field(gt=0)


class EventConfig(_Strict):
    kind: Literal["TERMINAL_TARGET", "SUP_EXCEED"]
    target: Optional[Union[float, List[float]]] = None
    delta: Optional[float] = Field(default=None, gt=0)
    tol: float = Field(gt=0)

    @model_validator(mode="after")
    def _parameters(self):
        if self.kind == "TERMINAL_TARGET" and self.target is None:
            raise ValueError("event.kind=TERMINAL_TARGET needs event.target")
        if self.kind == "SUP_EXCEED" and self.delta is None:
            raise ValueError("event.kind=SUP_EXCEED needs event.delta")
        return self


class SolverConfig(_Strict):
    fixed_point_tol: float = Field(default=1e-12, gt=0)
    fixed_point_max_iter: int = Field(default=100, ge=1)


class ExperimentConfig(_Strict):
    model: str
    process: Literal["frozen", "particles"]
    xi: XiConfig
    grid: GridConfig
    epsilons: List[float] = Field(min_length=1)
    particles: int = Field(ge=1)
    n_list: List[int]
    r_list: List[float]
    gap_levels: List[float]
    replicas: int = Field(ge=1)
    restarts: int = Field(ge=1)
    master_seed: int
    event: EventConfig
    output_dir: str
    solver: SolverConfig = Field(default_factory=SolverConfig)

    @field_validator("epsilons")
    @classmethod
    def _epsilons(cls, values: List[float]) -> List[float]:
        if any(not 0 < e <= 1 for e in values):
            raise ValueError(f"every epsilon must lie in (0, 1], got {values}")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ValueError(f"epsilons must be strictly decreasing, got {values}")
        return values

    @field_validator("n_list")
    @classmethod
    def _n_list(cls, values: List[int]) -> List[int]:
        if any(n < 1 for n in values):
            raise ValueError(f"discretization indices must be >= 1, got {values}")
        return values

    @field_validator("r_list")
    @classmethod
    def _r_list(cls, values: List[float]) -> List[float]:
        if any(r < 0 for r in values):
            raise ValueError(f"truncation levels must be >= 0, got {values}")
        return values

    @field_validator("gap_levels")
    @classmethod
    def _gap_levels(cls, values: List[float]) -> List[float]:
        if any(level <= 0 for level in values):
            raise ValueError(f"gap levels must be > 0, got {values}")
        return values

    @model_validator(mode="after")
    def _geometry(self):
        grid = self.time_grid()
        for n in self.n_list:
            grid.steps_per_block(n)
        return self

    def time_grid(self) -> TimeGrid:
        return TimeGrid(self.grid.tau, self.grid.T, self.grid.h)

    def model_spec(self) -> ModelSpec:
        return builtin(self.model)

    def initial_segment(self, spec: ModelSpec) -> Segment:
        grid = self.time_grid()
        if self.xi.kind == "constant":
            return constant_initial(grid, self.xi.value, spec.dim_d)
        return initial_from_nodes(grid, self.xi.nodes)

    def rare_event(self, x0: PathGrid) -> RareEvent:
        if self.event.kind == EventKind.TERMINAL_TARGET.name:
            return RareEvent.terminal_target(np.asarray(self.event.target, dtype=float), tol=self.event.tol)
        return RareEvent.sup_exceed(self.event.delta, x0, tol=self.event.tol)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(self.solver.fixed_point_tol, self.solver.fixed_point_max_iter)

    def output_path(self) -> Path:
        return Path(os.environ.get(OUTPUT_DIR_ENV) or self.output_dir)


def parse_config(raw: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(f"invalid experiment config: {e}") from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, 'r') as f:
            raw = yaml.safe_load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"config {path} is not valid YAML: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} must be a mapping of sections, got {type(raw).__name__}")
    cfg = parse_config(raw)
    logger.info(f"Loaded config {path}: model={cfg.model}, process={cfg.process}")
    return cfg
