import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from relaxation_cli.relax.core import (
    ModelSystem,
    PartitionedState,
    from_partitioned,
    partitioned_entropy_gradient,
    partitioned_entropy_hessian,
    require_in_state_space,
    to_partitioned,
    transform_inverse,
    unpartition_cells,
)
from relaxation_cli.relax.exceptions import (
    MaxwellianError,
    MaxwellianUnavailable,
    NoConvergence,
    StateSpaceExit,
)

LOGGER = logging.getLogger("relaxation-cli")

ARMIJO = 1e-4
ROUNDING_SLACK = 10.0 * np.finfo(float).eps


@dataclass
class MaxwellianResult:
    M: Optional[np.ndarray]
    iterations: int
    residual: float
    converged: bool
    objective: List[float] = field(default_factory=list)
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "M": None if self.M is None else self.M.tolist(),
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "objective": list(self.objective),
            "error": self.error,
        }

    def require(self, model_id: str = "the model") -> np.ndarray:
        """M, or MaxwellianUnavailable when the solve failed."""
        if not self.converged:
            raise MaxwellianUnavailable(
                f"Maxwellian of {model_id} is unavailable: {self.error}",
                detail={"residual": self.residual},
            )
        return self.M


@dataclass
class MultiStartResult:
    solutions: List[np.ndarray]
    spread: float
    failures: int


def _state(model: ModelSystem, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return from_partitioned(model, PartitionedState(u=u, v=v))


def _v_derivatives(model: ModelSystem, U: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    split = model.n - model.r
    gradient = partitioned_entropy_gradient(model, U)
    hessian = partitioned_entropy_hessian(model, U)[split:, split:]
    scale = max(1.0, float(np.abs(gradient).max()))
    return gradient[split:], hessian, scale


def _newton(
    model: ModelSystem,
    u: np.ndarray,
    v0: np.ndarray,
    tol: float,
    max_steps: int,
    max_halvings: int,
) -> Tuple[np.ndarray, int, float, List[float]]:
    """Damped Newton on v -> eta(P^-1 (u, v)); returns v, iterations, residual and the
    objective at each accepted iterate."""
    v = np.array(v0, dtype=float)
    U = _state(model, u, v)
    if not model.in_state_space(U):
        raise StateSpaceExit(
            f"Initial guess lies outside the state space of {model.model_id}",
            detail={"u": u.tolist(), "v0": v.tolist()},
        )
    phi = model.entropy(U)
    trace = [phi]
    for iteration in range(max_steps + 1):
        g, H, scale = _v_derivatives(model, U)
        residual = float(np.abs(g).max())
        if residual <= tol * scale:
            v, U, residual = _polish(model, u, v, U, g, H, residual)
            LOGGER.debug(f"Maxwellian of {model.model_id} converged in {iteration} steps")
            return v, iteration, residual, trace
        if iteration == max_steps:
            break
        try:
            step = -scipy.linalg.solve(H, g, assume_a="pos")
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NoConvergence(
                f"Entropy Hessian block is not positive definite: {e}",
                detail={"v": v.tolist()},
            )
        slope = float(g @ step)
        t = 1.0
        in_space = False
        for _ in range(max_halvings + 1):
            trial_v = v + t * step
            trial_U = _state(model, u, trial_v)
            if model.in_state_space(trial_U):
                in_space = True
                trial_phi = model.entropy(trial_U)
                if trial_phi <= phi + ARMIJO * t * slope + ROUNDING_SLACK * (1.0 + abs(phi)):
                    break
            t *= 0.5
        else:
            if not in_space:
                raise StateSpaceExit(
                    f"Every damped Newton step leaves the state space of {model.model_id}",
                    detail={"u": u.tolist(), "v": v.tolist()},
                )
            raise NoConvergence(
                f"Line search stalled after {max_halvings} halvings",
                detail={"v": v.tolist(), "residual": residual},
            )
        v, U, phi = trial_v, trial_U, trial_phi
        trace.append(phi)
    raise NoConvergence(
        f"Maxwellian of {model.model_id} did not converge in {max_steps} Newton steps",
        detail={"v": v.tolist(), "residual": residual},
    )


def _polish(model, u, v, U, g, H, residual):
    # one undamped step past the tolerance, kept only if it lowers the residual
    try:
        trial_v = v - scipy.linalg.solve(H, g, assume_a="pos")
    except (np.linalg.LinAlgError, ValueError):
        return v, U, residual
    trial_U = _state(model, u, trial_v)
    if not model.in_state_space(trial_U):
        return v, U, residual
    trial_residual = float(np.abs(_v_derivatives(model, trial_U)[0]).max())
    if trial_residual <= residual:
        return trial_v, trial_U, trial_residual
    return v, U, residual


def solve_equilibrium_v(
    model: ModelSystem,
    u: np.ndarray,
    v0: np.ndarray,
    tol: float = 1e-12,
    max_steps: int = 100,
    max_halvings: int = 60,
) -> np.ndarray:
    """v = h(u): the minimizer of the strictly convex map v -> eta~(u, v)."""
    u = np.asarray(u, dtype=float)
    if model.r == 0:
        return np.zeros(0)
    return _newton(model, u, np.asarray(v0, dtype=float), tol, max_steps, max_halvings)[0]


def _v_derivatives_cells(
    model: ModelSystem, U: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    split = model.n - model.r
    inverse = transform_inverse(model)
    gradient = model.entropy_gradient_cells(U) @ inverse
    hessian = inverse.T @ model.entropy_hessian_cells(U) @ inverse
    scale = np.maximum(1.0, np.abs(gradient).max(axis=1))
    return gradient[:, split:], hessian[:, split:, split:], scale


def _newton_steps(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    return -np.linalg.solve(H, g[..., None])[..., 0]


def solve_equilibrium_cells(
    model: ModelSystem,
    u: np.ndarray,
    v0: np.ndarray,
    tol: float = 1e-12,
    max_steps: int = 100,
    max_halvings: int = 60,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """h(u) for every row of ``u``: the damped Newton of ``solve_equilibrium_v`` run on
    all rows at once.

    Rows that satisfy the tolerance at ``v0`` keep it unchanged. Returns v, the states
    P^-1 (u, v) and the number of Newton steps summed over the rows.
    """
    u = np.asarray(u, dtype=float)
    v = np.array(v0, dtype=float)
    if model.r == 0:
        return v, unpartition_cells(model, u, v), 0
    U = unpartition_cells(model, u, v)
    inside = model.in_state_space_cells(U)
    if not inside.all():
        cell = int(np.argmin(inside))
        raise StateSpaceExit(
            f"Initial guess of row {cell} lies outside the state space of {model.model_id}",
            detail={"row": cell, "u": u[cell].tolist(), "v0": v[cell].tolist()},
        )
    phi = model.entropy_cells(U)
    stepped = np.zeros(len(u), dtype=bool)
    active = np.arange(len(u))
    steps = 0
    for iteration in range(max_steps + 1):
        g, H, scale = _v_derivatives_cells(model, U[active])
        residual = np.abs(g).max(axis=1)
        done = residual <= tol * scale
        polish = done & stepped[active]
        if polish.any():
            _polish_cells(model, u, v, U, active[polish], g[polish], H[polish])
        active, g, H, residual = active[~done], g[~done], H[~done], residual[~done]
        if not active.size:
            return v, U, steps
        if iteration == max_steps:
            break
        try:
            step = _newton_steps(H, g)
        except np.linalg.LinAlgError as e:
            raise NoConvergence(
                f"Entropy Hessian block is not invertible: {e}",
                detail={"rows": active.tolist()},
            )
        steps += active.size
        slope = np.sum(g * step, axis=1)
        t = np.ones(active.size)
        pending = np.ones(active.size, dtype=bool)
        landed = np.zeros(active.size, dtype=bool)
        for _ in range(max_halvings + 1):
            idx = np.flatnonzero(pending)
            rows = active[idx]
            trial_v = v[rows] + t[idx, None] * step[idx]
            trial_U = unpartition_cells(model, u[rows], trial_v)
            accepted = model.in_state_space_cells(trial_U)
            landed[idx[accepted]] = True
            ok = np.flatnonzero(accepted)
            trial_phi = model.entropy_cells(trial_U[ok])
            base = phi[rows[ok]]
            accepted[ok] = trial_phi <= (
                base + ARMIJO * t[idx[ok]] * slope[idx[ok]] + ROUNDING_SLACK * (1.0 + np.abs(base))
            )
            chosen = rows[accepted]
            v[chosen], U[chosen] = trial_v[accepted], trial_U[accepted]
            phi[chosen] = trial_phi[accepted[ok]]
            pending[idx[accepted]] = False
            if not pending.any():
                break
            t[idx[~accepted]] *= 0.5
        else:
            stalled = np.flatnonzero(pending)
            row = int(active[stalled[0]])
            if not landed[stalled].any():
                raise StateSpaceExit(
                    f"Every damped Newton step of row {row} leaves the state space of "
                    f"{model.model_id}",
                    detail={"row": row, "u": u[row].tolist(), "v": v[row].tolist()},
                )
            raise NoConvergence(
                f"Line search of row {row} stalled after {max_halvings} halvings",
                detail={"row": row, "v": v[row].tolist()},
            )
        stepped[active] = True
    raise NoConvergence(
        f"Maxwellian of {model.model_id} did not converge in {max_steps} Newton steps "
        f"for {active.size} rows",
        detail={"rows": active.tolist(), "residual": float(residual.max())},
    )


def _polish_cells(model, u, v, U, rows, g, H):
    # one undamped step past the tolerance, kept where it lowers the residual
    try:
        trial_v = v[rows] + _newton_steps(H, g)
    except np.linalg.LinAlgError:
        return
    W = np.concatenate([u[rows], trial_v], axis=1)
    trial_U = model.apply_transform_inverse(W.T).T
    inside = np.all(np.isfinite(trial_U), axis=1)
    inside[inside] = model.in_state_space_cells(trial_U[inside])
    if not inside.any():
        return
    trial_g = _v_derivatives_cells(model, trial_U[inside])[0]
    better = np.abs(trial_g).max(axis=1) <= np.abs(g[inside]).max(axis=1)
    keep = np.flatnonzero(inside)[better]
    v[rows[keep]], U[rows[keep]] = trial_v[keep], trial_U[keep]


def maxwellian(
    model: ModelSystem,
    U: np.ndarray,
    v0: Optional[np.ndarray] = None,
    tol: float = 1e-12,
    max_steps: int = 100,
    strict: bool = True,
) -> MaxwellianResult:
    """M(U) = P^-1 (u, h(u)) with (u, v) = P U; the conserved part u is copied.

    With ``strict=False`` solver failures come back as an unconverged result.
    """
    U = require_in_state_space(model, U)
    if model.r == 0:
        return MaxwellianResult(M=U.copy(), iterations=0, residual=0.0, converged=True)
    state = to_partitioned(model, U)
    start = state.v if v0 is None else np.asarray(v0, dtype=float)
    try:
        v, iterations, residual, trace = _newton(model, state.u, start, tol, max_steps, 60)
    except MaxwellianError as e:
        if strict:
            raise
        LOGGER.debug(f"Maxwellian failed for {model.model_id}: {e.message}")
        return MaxwellianResult(
            M=None,
            iterations=0,
            residual=float("inf"),
            converged=False,
            error=f"{type(e).__name__}: {e.message}",
        )
    return MaxwellianResult(
        M=_state(model, state.u, v),
        iterations=iterations,
        residual=residual,
        converged=True,
        objective=trace,
    )


def multi_start_maxwellian(
    model: ModelSystem,
    u: np.ndarray,
    starts: int,
    rng: np.random.Generator,
    tol: float = 1e-12,
) -> MultiStartResult:
    """Solve h(u) from ``starts`` random initial guesses; the spread is the largest
    sup-norm distance of a converged solution from the first one."""
    u = np.asarray(u, dtype=float)
    split = model.n - model.r
    guesses = []
    attempts = 0
    while len(guesses) < starts and attempts < 100 * starts:
        attempts += 1
        v0 = (model.transform @ model.draw_state(rng))[split:]
        if model.in_state_space(_state(model, u, v0)):
            guesses.append(v0)
    solutions = []
    failures = starts - len(guesses)
    for v0 in guesses:
        try:
            solutions.append(solve_equilibrium_v(model, u, v0, tol=tol))
        except MaxwellianError as e:
            LOGGER.debug(f"Multi-start solve failed: {e.message}")
            failures += 1
    spread = 0.0
    if solutions:
        reference = solutions[0]
        spread = max(float(np.abs(s - reference).max()) for s in solutions) if reference.size else 0.0
    return MultiStartResult(solutions=solutions, spread=spread, failures=failures)
