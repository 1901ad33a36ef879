"""First-order finite volume transport (Rusanov) with an implicit source solve, both
evaluated on all cells at once."""
import logging
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, validator

try:
    from typing import Literal
except ImportError:  # pragma: no cover
    from typing_extensions import Literal

from relaxation_cli.relax.core import (
    ModelSystem,
    partition_cells,
    partitioned_source_jacobian_cells,
    spectral_radius_cells,
    unpartition_cells,
)
from relaxation_cli.relax.exceptions import NewtonFailure, NonFiniteResult, StateSpaceExit
from relaxation_cli.relax.maxwellian import solve_equilibrium_cells

from .grid import Grid1D

LOGGER = logging.getLogger("relaxation-cli")

# halvings of a Newton step before the implicit solve gives up
MAX_DAMPING = 30
ROUNDING_SLACK = 10.0 * np.finfo(float).eps


class SolverConfig(BaseModel):
    mode: Literal["full", "simplified", "equilibrium"] = "full"
    eps: float = 0.1
    cfl: float = 0.45
    t_final: float = 0.5
    snapshots: int = 10
    freeze_state: Optional[List[float]] = None
    newton_max: int = 50
    newton_tol: float = 1e-12

    class Config:
        extra = "forbid"

    @validator("eps", "t_final", "newton_tol")
    def positive(cls, v, field):
        if v <= 0:
            raise ValueError(f"{field.name} must be positive")
        return v

    @validator("cfl")
    def courant_number(cls, v):
        if not 0 < v < 1:
            raise ValueError("cfl must lie in (0, 1)")
        return v

    @validator("snapshots", "newton_max")
    def at_least_one(cls, v, field):
        if v < 1:
            raise ValueError(f"{field.name} must be at least 1")
        return v


def numerical_flux(model: ModelSystem, U_L: np.ndarray, U_R: np.ndarray, j: int = 0) -> np.ndarray:
    """Rusanov flux 1/2 (F(U_L) + F(U_R)) - s/2 (U_R - U_L), s the larger spectral radius.

    Takes one pair of states or two (N, n) arrays of them.
    """
    U_L, U_R = np.asarray(U_L, dtype=float), np.asarray(U_R, dtype=float)
    single = U_L.ndim == 1
    U_L, U_R = np.atleast_2d(U_L), np.atleast_2d(U_R)
    s = np.maximum(spectral_radius_cells(model, U_L, j), spectral_radius_cells(model, U_R, j))
    flux = 0.5 * (model.flux_cells(U_L, j) + model.flux_cells(U_R, j)) - 0.5 * s[:, None] * (
        U_R - U_L
    )
    if not np.all(np.isfinite(flux)):
        raise NonFiniteResult("Numerical flux is not finite")
    return flux[0] if single else flux


class ImexScheme:
    """Explicit conservative transport followed by the source step on each cell.

    ``full`` mode solves v = v* + (dt / eps) q(u*, v) by damped Newton (u is copied),
    ``equilibrium`` mode transports the conserved part u and sets v = h(u). Simplified
    runs use ``full`` on the frozen-dissipation model.
    """

    def __init__(self, model: ModelSystem, grid: Grid1D, config: SolverConfig):
        self.model = model
        self.grid = grid
        self.config = config
        self.split = model.n - model.r
        self.newton_iterations = 0

    def wave_speeds(self, U: np.ndarray) -> np.ndarray:
        return spectral_radius_cells(self.model, U, 0)

    def time_step(self, U: np.ndarray) -> float:
        return self.config.cfl * self.grid.dx / float(self.wave_speeds(U).max())

    def interface_fluxes(self, U: np.ndarray) -> np.ndarray:
        """Flux through the right face of every cell (periodic)."""
        return numerical_flux(self.model, U, np.roll(U, -1, axis=0))

    def _require_inside(self, U: np.ndarray, t: float, stage: str) -> None:
        inside = self.model.in_state_space_cells(U)
        if not inside.all():
            cell = int(np.argmin(inside))
            raise StateSpaceExit(
                f"Cell {cell} left the state space during {stage} at t={t:.6g}",
                detail={"cell": cell, "t": t, "state": U[cell].tolist()},
            )

    def transport(self, U: np.ndarray, dt: float, t: float) -> np.ndarray:
        fluxes = self.interface_fluxes(U)
        U_new = U - dt / self.grid.dx * (fluxes - np.roll(fluxes, 1, axis=0))
        self._require_inside(U_new, t, "transport")
        return U_new

    def _partitioned_source(self, U: np.ndarray) -> np.ndarray:
        return (self.model.source_cells(U) @ self.model.transform.T)[:, self.split :]

    def relax(self, U_tr: np.ndarray, dt: float, t: float) -> Tuple[np.ndarray, int]:
        """Implicit source solve of every cell; returns the new states and the Newton
        steps summed over the cells. Cells that already satisfy the tolerance are kept."""
        model = self.model
        if model.r == 0:
            return U_tr, 0
        c = dt / self.config.eps
        tol = self.config.newton_tol
        u, v_tr = partition_cells(model, U_tr)
        v, U = v_tr.copy(), np.array(U_tr, dtype=float)
        identity = np.eye(model.r)
        active = np.arange(len(U))
        iterations = 0
        for iteration in range(self.config.newton_max + 1):
            q = self._partitioned_source(U[active])
            G = v[active] - v_tr[active] - c * q
            magnitudes = [np.abs(v[active]), np.abs(v_tr[active]), c * np.abs(q)]
            scale = 1.0 + np.max(np.concatenate(magnitudes, axis=1), axis=1)
            residual = np.abs(G).max(axis=1)
            remaining = residual > tol * scale
            active, G, scale, residual = (
                active[remaining],
                G[remaining],
                scale[remaining],
                residual[remaining],
            )
            if not active.size:
                return U, iterations
            if iteration == self.config.newton_max:
                break
            J = identity - c * partitioned_source_jacobian_cells(model, U[active])[
                :, self.split :, self.split :
            ]
            try:
                delta = np.linalg.solve(J, -G[..., None])[..., 0]
            except np.linalg.LinAlgError:
                break
            iterations += active.size
            damping = np.ones(active.size)
            pending = np.ones(active.size, dtype=bool)
            for _ in range(MAX_DAMPING):
                idx = np.flatnonzero(pending)
                cells = active[idx]
                trial_v = v[cells] + damping[idx, None] * delta[idx]
                trial_U = unpartition_cells(model, u[cells], trial_v)
                accepted = model.in_state_space_cells(trial_U)
                ok = np.flatnonzero(accepted)
                trial_G = trial_v[ok] - v_tr[cells[ok]] - c * self._partitioned_source(trial_U[ok])
                bound = np.maximum(
                    (1.0 - 1e-4 * damping[idx[ok]]) * residual[idx[ok]],
                    ROUNDING_SLACK * scale[idx[ok]],
                )
                accepted[ok] = np.abs(trial_G).max(axis=1) <= bound
                v[cells[accepted]], U[cells[accepted]] = trial_v[accepted], trial_U[accepted]
                pending[idx[accepted]] = False
                if not pending.any():
                    break
                damping[idx[~accepted]] *= 0.5
            else:
                stalled = np.flatnonzero(pending)
                active, residual = active[stalled], residual[stalled]
                break
        cell = int(active[0])
        raise NewtonFailure(
            f"Implicit source solve failed in cell {cell} at t={t:.6g}",
            detail={"cell": cell, "t": t, "residual": float(residual[0]), "cells": active.size},
        )

    def project(self, U: np.ndarray, v_start: Optional[np.ndarray] = None) -> np.ndarray:
        """Replace v by h(u) in every cell; cells already at equilibrium are kept as they are."""
        model = self.model
        if model.r == 0:
            return U
        u, v = partition_cells(model, U)
        start = v if v_start is None else v_start
        v_eq, U_eq, steps = solve_equilibrium_cells(model, u, start, tol=self.config.newton_tol)
        self.newton_iterations += steps
        kept = np.all(v_eq == v, axis=1)
        U_eq[kept] = U[kept]
        return U_eq

    def step_equilibrium(self, U: np.ndarray, dt: float, t: float) -> np.ndarray:
        """Transport u with the fluxes of the equilibrium states U, then solve v = h(u)
        from the previous v. Cells where that start leaves the state space start from the
        transported v instead."""
        model = self.model
        fluxes = self.interface_fluxes(U) @ model.transform.T
        u, v = partition_cells(model, U)
        W = np.concatenate([u, v], axis=1) - dt / self.grid.dx * (
            fluxes - np.roll(fluxes, 1, axis=0)
        )
        u_new, v_transported = W[:, : self.split], W[:, self.split :]
        if model.r == 0:
            U_new = unpartition_cells(model, u_new, v_transported)
            self._require_inside(U_new, t, "transport")
            return U_new
        start = v.copy()
        outside = ~model.in_state_space_cells(unpartition_cells(model, u_new, v))
        start[outside] = v_transported[outside]
        U_start = unpartition_cells(model, u_new, start)
        self._require_inside(U_start, t, "transport")
        U_new = self.project(U_start)
        unchanged = np.all(u_new == u, axis=1) & np.all(U_new == U_start, axis=1)
        U_new[unchanged] = U[unchanged]
        return U_new

    def step(self, U: np.ndarray, dt: float, t: float) -> np.ndarray:
        if self.config.mode == "equilibrium":
            return self.step_equilibrium(U, dt, t)
        U_new, iterations = self.relax(self.transport(U, dt, t), dt, t)
        self.newton_iterations += iterations
        return U_new


def step_imex(
    model: ModelSystem, config: SolverConfig, grid: Grid1D, U: np.ndarray, dt: float, t: float = 0.0
) -> np.ndarray:
    return ImexScheme(model, grid, config).step(np.asarray(U, dtype=float), dt, t)
