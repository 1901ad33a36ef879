import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, root_validator, validator

try:
    from typing import Literal
except ImportError:  # pragma: no cover
    from typing_extensions import Literal

from relaxation_cli.relax.core import (
    ModelSystem,
    PartitionedState,
    from_partitioned,
    require_in_state_space,
)
from relaxation_cli.relax.exceptions import StateSpaceViolation
from relaxation_cli.relax.maxwellian import maxwellian, solve_equilibrium_v

LOGGER = logging.getLogger("relaxation-cli")


class Grid1D(BaseModel):
    """Uniform periodic grid of ``cells`` cells on [x_min, x_max]."""

    cells: int = 200
    x_min: float = 0.0
    x_max: float = 1.0

    class Config:
        extra = "forbid"
        allow_mutation = False

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

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.cells) + 0.5) * self.dx


class InitialCondition(BaseModel):
    """Conserved part u(x) = u_ref + amplitude * profile(x) * direction around the
    Maxwellian of ``reference_state``; v = h(u) when ``equilibrium`` is set."""

    profile: Literal["gaussian", "sine", "uniform"] = "gaussian"
    amplitude: float = 0.2
    width: float = 0.1
    center: float = 0.5
    reference_state: Optional[List[float]] = None
    direction: Optional[List[float]] = None
    equilibrium: bool = True

    class Config:
        extra = "forbid"

    @validator("width")
    def positive_width(cls, v):
        if v <= 0:
            raise ValueError("width must be positive")
        return v

    def shape(self, grid: Grid1D) -> np.ndarray:
        x = grid.centers
        if self.profile == "uniform":
            return np.zeros_like(x)
        if self.profile == "sine":
            return np.sin(2.0 * np.pi * (x - grid.x_min) / grid.length)
        # periodic distance to the center
        offset = np.mod(x - self.center + 0.5 * grid.length, grid.length) - 0.5 * grid.length
        return np.exp(-0.5 * (offset / self.width) ** 2)


def initial_state(model: ModelSystem, grid: Grid1D, ic: InitialCondition) -> np.ndarray:
    """Cell averages of the initial data, shape (cells, n)."""
    reference = model.reference_state() if ic.reference_state is None else ic.reference_state
    reference = require_in_state_space(model, reference)
    M = maxwellian(model, reference).M
    split = model.n - model.r
    w = model.transform @ M
    u_ref, v_ref = w[:split], w[split:]
    direction = np.zeros(split)
    if split:
        if ic.direction is None:
            direction[0] = 1.0
        else:
            direction = np.asarray(ic.direction, dtype=float)
            if direction.shape != (split,):
                raise StateSpaceViolation(
                    f"Initial direction must have {split} conserved components"
                )
    states = np.empty((grid.cells, model.n))
    v = v_ref
    for i, bump in enumerate(ic.shape(grid)):
        offset = ic.amplitude * bump * direction
        if not np.any(offset):
            states[i] = M if ic.equilibrium else reference
            continue
        u = u_ref + offset
        if ic.equilibrium and model.r:
            # warm start from the neighbouring cell
            v = solve_equilibrium_v(model, u, v)
        else:
            v = (model.transform @ reference)[split:]
        states[i] = from_partitioned(model, PartitionedState(u=u, v=v))
        require_in_state_space(model, states[i])
    LOGGER.debug(f"Initial data: {ic.profile} profile on {grid.cells} cells")
    return states
