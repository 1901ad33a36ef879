from typing import Callable, Optional

import numpy as np

from relaxation_cli.relax.exceptions import (
    DimensionMismatch,
    NonFiniteResult,
    StateSpaceViolation,
)

from .system import ModelSystem, StateVector, as_state, transform_inverse

EPS_CBRT = np.finfo(float).eps ** (1.0 / 3.0)


def fd_steps(U: np.ndarray, h: Optional[float] = None) -> np.ndarray:
    """Central difference steps: eps^(1/3) * max(1, |U_k|) unless a fixed h is given."""
    if h is not None:
        return np.full(U.shape, float(h))
    return EPS_CBRT * np.maximum(1.0, np.abs(U))


def fd_jacobian(
    func: Callable[[np.ndarray], np.ndarray],
    U: np.ndarray,
    in_state_space: Callable[[np.ndarray], bool],
    h: Optional[float] = None,
    label: str = "function",
) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    steps = fd_steps(U, h)
    columns = []
    for k, step in enumerate(steps):
        offset = np.zeros_like(U)
        offset[k] = step
        plus, minus = U + offset, U - offset
        if not (in_state_space(plus) and in_state_space(minus)):
            raise StateSpaceViolation(
                f"Finite difference of {label} leaves the state space along component {k}",
                detail={"state": U.tolist(), "step": float(step)},
            )
        columns.append((np.asarray(func(plus)) - np.asarray(func(minus))) / (2.0 * step))
    jacobian = np.column_stack(columns)
    if not np.all(np.isfinite(jacobian)):
        raise NonFiniteResult(f"Finite difference of {label} is not finite")
    return jacobian


def fd_gradient(
    func: Callable[[np.ndarray], float],
    U: np.ndarray,
    in_state_space: Callable[[np.ndarray], bool],
    h: Optional[float] = None,
    label: str = "function",
) -> np.ndarray:
    return fd_jacobian(lambda x: np.atleast_1d(func(x)), U, in_state_space, h, label)[0]


def flux_jacobian(
    model: ModelSystem, U: StateVector, j: int = 0, h: Optional[float] = None
) -> np.ndarray:
    """F_jU at U: the model's analytic Jacobian when it has one, central differences otherwise."""
    U = as_state(model, U)
    if not 0 <= j < model.d:
        raise DimensionMismatch(f"Direction {j} out of range for d={model.d}")
    analytic = model.analytic_flux_jacobian(U, j)
    if analytic is not None:
        return analytic
    return fd_flux_jacobian(model, U, j, h)


def fd_flux_jacobian(
    model: ModelSystem, U: StateVector, j: int = 0, h: Optional[float] = None
) -> np.ndarray:
    return fd_jacobian(
        lambda x: model.flux(x, j), U, model.in_state_space, h, label=f"flux F_{j}"
    )


def source_jacobian(model: ModelSystem, U: StateVector, h: Optional[float] = None) -> np.ndarray:
    U = as_state(model, U)
    analytic = model.analytic_source_jacobian(U)
    if analytic is not None:
        return analytic
    return fd_source_jacobian(model, U, h)


def fd_source_jacobian(
    model: ModelSystem, U: StateVector, h: Optional[float] = None
) -> np.ndarray:
    return fd_jacobian(model.source, U, model.in_state_space, h, label="source")


def spectral_radius(model: ModelSystem, U: StateVector, j: int = 0) -> float:
    speed = model.max_wave_speed(U, j)
    if speed is not None:
        return float(speed)
    eigenvalues = np.linalg.eigvals(flux_jacobian(model, U, j))
    return float(np.abs(eigenvalues).max())


def partitioned_source_jacobian(model: ModelSystem, U: StateVector) -> np.ndarray:
    """P Q_U P^-1, the source Jacobian in the variables (u, v) = P U."""
    PJ = model.transform @ source_jacobian(model, U)
    return model.apply_transform_inverse_transpose(PJ.T).T


def spectral_radius_cells(model: ModelSystem, U: np.ndarray, j: int = 0) -> np.ndarray:
    """Largest |eigenvalue| of F_jU for every row of U."""
    speeds = model.max_wave_speed_cells(U, j)
    if speeds is not None:
        return np.asarray(speeds, dtype=float)
    return np.array([spectral_radius(model, u, j) for u in U])


def source_jacobian_cells(model: ModelSystem, U: np.ndarray) -> np.ndarray:
    """Q_U for every row of U, shape (N, n, n)."""
    jacobians = model.analytic_source_jacobian_cells(U)
    if jacobians is not None:
        return jacobians
    return np.array([source_jacobian(model, u) for u in U]).reshape(len(U), model.n, model.n)


def partitioned_source_jacobian_cells(model: ModelSystem, U: np.ndarray) -> np.ndarray:
    P = model.transform
    return P @ source_jacobian_cells(model, U) @ transform_inverse(model)
