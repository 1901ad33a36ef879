import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from relaxation_cli.relax.core import ModelSystem, freeze_dissipation, require_in_state_space
from relaxation_cli.relax.exceptions import GridMismatch
from relaxation_cli.relax.maxwellian import maxwellian

from .grid import Grid1D, InitialCondition, initial_state
from .scheme import ImexScheme, SolverConfig

LOGGER = logging.getLogger("relaxation-cli")

ENTROPY_SLACK = 1e-8


def total_entropy(model: ModelSystem, U: np.ndarray, dx: float) -> float:
    return float(np.sum(model.entropy_cells(U)) * dx)


def entropy_increased(previous: float, current: float) -> bool:
    return current > previous + ENTROPY_SLACK * (1.0 + abs(previous))


@dataclass
class Trajectory:
    model_id: str
    mode: str
    eps: Optional[float]
    grid: Grid1D
    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    entropy: List[float] = field(default_factory=list)
    # (t, total entropy) after every step, starting at t=0
    entropy_history: List[List[float]] = field(default_factory=list)
    steps: int = 0
    newton_iterations: int = 0
    entropy_violations: int = 0

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def conserved_totals(self, model: ModelSystem) -> np.ndarray:
        """sum_i (P U_i)_k dx for every snapshot and conserved component k."""
        rows = model.conserved_rows
        return np.array([(U @ rows.T).sum(axis=0) * self.grid.dx for U in self.states])

    def trajectory_csv(self) -> str:
        n = self.states[0].shape[1]
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["t", "x"] + [f"comp_{k}" for k in range(n)])
        x = self.grid.centers
        for t, U in zip(self.times, self.states):
            for i, u in enumerate(U):
                writer.writerow([repr(float(t)), repr(float(x[i]))] + [repr(float(c)) for c in u])
        return buffer.getvalue()

    def entropy_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["t", "total_entropy"])
        for t, value in zip(self.times, self.entropy):
            writer.writerow([repr(float(t)), repr(float(value))])
        return buffer.getvalue()

    def summary(self) -> Dict[str, Any]:
        return {
            "model_id": self.model_id,
            "mode": self.mode,
            "eps": self.eps,
            "cells": self.grid.cells,
            "snapshots": len(self.times),
            "t_final": self.times[-1],
            "steps": self.steps,
            "newton_iterations": self.newton_iterations,
            "entropy_violations": self.entropy_violations,
        }


def freeze_state_for(
    model: ModelSystem, config: SolverConfig, U0: np.ndarray
) -> np.ndarray:
    """U_* of the simplified system: the configured state, else the Maxwellian of the
    spatial average of the initial data."""
    if config.freeze_state is not None:
        return require_in_state_space(model, config.freeze_state)
    return maxwellian(model, U0.mean(axis=0)).M


def simulate(
    model: ModelSystem,
    config: SolverConfig,
    grid: Grid1D,
    ic: Optional[InitialCondition] = None,
) -> Trajectory:
    """Advance the initial data to ``t_final`` on a periodic grid.

    Snapshots are taken at t_k = k t_final / snapshots; steps are clipped to land on them
    so runs in different modes share identical snapshot times.
    """
    ic = ic or InitialCondition()
    U = initial_state(model, grid, ic)
    scheme_model = model
    scheme_config = config
    if config.mode == "simplified":
        scheme_model = freeze_dissipation(model, freeze_state_for(model, config, U))
        scheme_config = config.copy(update={"mode": "full"})
    scheme = ImexScheme(scheme_model, grid, scheme_config)
    if config.mode == "equilibrium":
        U = scheme.project(U)

    trajectory = Trajectory(
        model_id=model.model_id,
        mode=config.mode,
        eps=None if config.mode == "equilibrium" else config.eps,
        grid=grid,
    )
    t = 0.0
    energy = total_entropy(model, U, grid.dx)
    trajectory.times.append(t)
    trajectory.states.append(U.copy())
    trajectory.entropy.append(energy)
    trajectory.entropy_history.append([t, energy])
    for k in range(1, config.snapshots + 1):
        target = k * config.t_final / config.snapshots
        while t < target:
            remaining = target - t
            dt = min(scheme.time_step(U), remaining)
            U = scheme.step(U, dt, t)
            t = target if dt == remaining else t + dt
            trajectory.steps += 1
            current = total_entropy(model, U, grid.dx)
            if entropy_increased(energy, current):
                trajectory.entropy_violations += 1
                LOGGER.debug(f"Total entropy rose from {energy!r} to {current!r} at t={t:.6g}")
            energy = current
            trajectory.entropy_history.append([t, energy])
        trajectory.times.append(t)
        trajectory.states.append(U.copy())
        trajectory.entropy.append(energy)
    trajectory.newton_iterations = scheme.newton_iterations
    LOGGER.debug(
        f"{model.model_id} ({config.mode}) reached t={t} in {trajectory.steps} steps, "
        f"{trajectory.newton_iterations} Newton iterations"
    )
    if trajectory.entropy_violations:
        LOGGER.warning(
            f"Total entropy increased beyond the slack in {trajectory.entropy_violations} steps"
        )
    return trajectory


def compare_trajectories(
    A: Trajectory,
    B: Trajectory,
    norm: str = "sup",
    over_time: bool = False,
    projection: Optional[np.ndarray] = None,
) -> float:
    """Discrete norm of A - B at the final snapshot (or the max over all snapshots).

    ``projection`` maps each cell state before differencing, e.g. the conserved rows of P.
    """
    if A.grid != B.grid:
        raise GridMismatch(f"Grids differ: {A.grid} vs {B.grid}")
    if len(A.times) != len(B.times) or not np.array_equal(A.times, B.times):
        raise GridMismatch("Snapshot times differ")
    if norm not in ("sup", "L1"):
        raise ValueError(f"Unknown norm {norm}")

    def distance(U_a: np.ndarray, U_b: np.ndarray) -> float:
        D = U_a - U_b
        if projection is not None:
            D = D @ np.asarray(projection).T
        if norm == "sup":
            return float(np.abs(D).max()) if D.size else 0.0
        return float(np.abs(D).sum() * A.grid.dx)

    if over_time:
        return max(distance(a, b) for a, b in zip(A.states, B.states))
    return distance(A.final_state, B.final_state)
