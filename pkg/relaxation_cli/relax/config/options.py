import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import click
from pydantic import BaseModel, BaseSettings, Field, ValidationError, root_validator, validator

try:
    from typing import Literal
except ImportError:  # pragma: no cover
    from typing_extensions import Literal

from relaxation_cli.relax.checks import SampleSpec, Tolerances
from relaxation_cli.relax.models import MUTATIONS, ModelRepository
from relaxation_cli.relax.solver import Grid1D, InitialCondition, SolverConfig

from .utils import repr_errors, yaml_config_settings_source

LOGGER = logging.getLogger("relaxation-cli")

DEFAULT_SEED = 42
DEFAULT_SWEEP_EPS = [0.1, 0.05, 0.025, 0.0125]


class BaseModelConfig:
    env_prefix = "relax_"
    env_file = ".env"
    env_file_encoding = "utf-8"
    allow_population_by_field_name = True
    yaml_key = "relax"

    @classmethod
    def customise_sources(
        cls,
        init_settings,
        env_settings,
        file_secret_settings,
    ):
        # load in order (from the highest priority to the least priority):
        # 1. command arguments
        # 2. environment variables and the .env file
        # 3. `relax` block of the config file
        # 4. secrets
        return (
            init_settings,
            env_settings,
            yaml_config_settings_source(cls.yaml_key),
            file_secret_settings,
        )


class RelaxOptions(BaseSettings):
    """Ambient settings of a run; the run description itself lives in RunConfig."""

    debug: bool = False
    workers: int = 1
    out_dir: Path = Path("relax-out")
    seed: Optional[int] = None

    def __init__(self, *args, **data: Any):
        try:
            super().__init__(*args, **data)
        except ValidationError as e:
            raise click.exceptions.UsageError(f"Invalid config: {repr_errors(e)}")

    class Config(BaseModelConfig):
        pass

    @validator("workers")
    def _validate_workers(cls, workers: int) -> int:
        if workers < 1:
            raise ValueError("workers must be at least 1")
        return workers


class ModelSpec(BaseModel):
    family: str
    params: Dict[str, Any] = {}

    class Config:
        extra = "forbid"

    @validator("family")
    def registered_family(cls, family: str) -> str:
        known = ModelRepository.get_instance().list_models()
        if family not in known:
            raise ValueError(f'unknown model family "{family}", choose from {sorted(known)}')
        return family

    @validator("params", always=True)
    def family_params(cls, params: Dict[str, Any], values) -> Dict[str, Any]:
        # the family's own params model reports bad keys as params -> <key>
        family = values.get("family")
        if family is None:
            return params
        return ModelRepository.get_instance().parse_params(family, params).dict()


class SampleOptions(BaseModel):
    count: int = 1000
    seed: int = DEFAULT_SEED
    box: Optional[List[Tuple[float, float]]] = None
    near_equilibrium: int = 100

    class Config:
        extra = "forbid"

    @validator("count")
    def positive_count(cls, v):
        if v < 1:
            raise ValueError("count must be at least 1")
        return v

    @validator("seed", "near_equilibrium")
    def non_negative(cls, v, field):
        if v < 0:
            raise ValueError(f"{field.name} must not be negative")
        return v

    @validator("box")
    def ordered_intervals(cls, box):
        if box is not None and any(lo >= hi for lo, hi in box):
            raise ValueError("every box interval needs lower < upper")
        return box

    def spec(self) -> SampleSpec:
        box = None if self.box is None else tuple(tuple(b) for b in self.box)
        return SampleSpec(count=self.count, seed=self.seed, box=box)


class MaxwellianOptions(BaseModel):
    state: Optional[List[float]] = None
    starts: int = 1
    tol: float = 1e-12
    max_steps: int = 100

    class Config:
        extra = "forbid"

    @validator("starts", "max_steps")
    def at_least_one(cls, v, field):
        if v < 1:
            raise ValueError(f"{field.name} must be at least 1")
        return v

    @validator("tol")
    def positive_tol(cls, v):
        if v <= 0:
            raise ValueError("tol must be positive")
        return v


class SolverOptions(SolverConfig):
    cells: int = 200
    x_min: float = 0.0
    x_max: float = 1.0
    initial: InitialCondition = Field(default_factory=InitialCondition)

    @validator("cells")
    def enough_cells(cls, v):
        if v < 4:
            raise ValueError("cells must be at least 4")
        return v

    @root_validator(skip_on_failure=True)
    def ordered_bounds(cls, values):
        if values["x_max"] <= values["x_min"]:
            raise ValueError("x_max must exceed x_min")
        return values

    def grid(self) -> Grid1D:
        return Grid1D(cells=self.cells, x_min=self.x_min, x_max=self.x_max)

    def scheme_config(self, **update) -> SolverConfig:
        fields = self.dict(include=set(SolverConfig.__fields__))
        fields.update(update)
        return SolverConfig(**fields)


class SweepOptions(BaseModel):
    eps: List[float] = DEFAULT_SWEEP_EPS
    norm: Literal["sup", "L1"] = "sup"
    slope_window: Tuple[float, float] = (0.8, 1.2)

    class Config:
        extra = "forbid"

    @validator("eps")
    def decreasing_eps(cls, eps: List[float]) -> List[float]:
        if len(eps) < 3:
            raise ValueError("a sweep needs at least 3 values of eps")
        if any(e <= 0 for e in eps):
            raise ValueError("every eps must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps must be strictly decreasing")
        return eps

    @validator("slope_window")
    def ordered_window(cls, window):
        if window[0] >= window[1]:
            raise ValueError("slope_window needs lower < upper")
        return window


class RunConfig(BaseModel):
    """Resolved description of one run: model, task and the task-specific blocks."""

    model: ModelSpec
    task: Literal["verify", "maxwellian", "simulate", "sweep"] = "verify"
    mutate: Optional[str] = None
    freeze_at: Optional[List[float]] = None
    transform_seed: Optional[int] = None
    sample: SampleOptions = Field(default_factory=SampleOptions)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    maxwellian: MaxwellianOptions = Field(default_factory=MaxwellianOptions)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    sweep: SweepOptions = Field(default_factory=SweepOptions)

    class Config:
        extra = "forbid"

    @validator("mutate")
    def known_mutation(cls, mutate: Optional[str]) -> Optional[str]:
        if mutate is not None and mutate not in MUTATIONS:
            raise ValueError(f'unknown mutation "{mutate}", choose from {sorted(MUTATIONS)}')
        return mutate
