"""Checks built on equilibrium states: the equivalent characterizations of equilibria,
the source Jacobian at equilibrium, invertibility of q_v and the Maxwellian bounds."""
import logging
from typing import List, Sequence, Union

import numpy as np
import scipy.linalg

from relaxation_cli.relax.core import (
    ModelSystem,
    max_principal_angle,
    null_space_basis,
    partitioned_source_jacobian,
    source_jacobian,
)
from relaxation_cli.relax.exceptions import NoEquilibriumFound, NotEquilibrium
from relaxation_cli.relax.maxwellian import maxwellian

from .dissipation import off_equilibrium
from .records import CheckRecord, Worst
from .sampling import SampleSpec, resolve_states

LOGGER = logging.getLogger("relaxation-cli")

Sample = Union[SampleSpec, np.ndarray]


def find_equilibria(model: ModelSystem, states: np.ndarray, count: int = 10) -> List[np.ndarray]:
    """Maxwellians of the first sampled states whose equilibrium solve converges."""
    equilibria = []
    for U in states:
        result = maxwellian(model, U, strict=False)
        if result.converged:
            equilibria.append(result.M)
            if len(equilibria) == count:
                break
    if not equilibria:
        raise NoEquilibriumFound(
            f"Equilibrium solve failed for all {len(states)} sampled states of {model.model_id}"
        )
    LOGGER.debug(f"Found {len(equilibria)} equilibria of {model.model_id}")
    return equilibria


def require_equilibrium(model: ModelSystem, U: np.ndarray, tol: float) -> None:
    Q = model.source(U)
    L = model.dissipation_matrix(U)
    if off_equilibrium(Q, L, model.entropy_gradient(U), tol):
        raise NotEquilibrium(
            f"|Q| = {np.linalg.norm(Q):.3e} at a state passed as equilibrium",
            detail={"state": np.asarray(U).tolist()},
        )


def check_equilibrium_characterizations(
    model: ModelSystem, sample: Sample, tol: float = 1e-10, equilibria: Sequence = None
) -> CheckRecord:
    """Q = 0, eta_U . Q = 0 and L eta_U = 0 hold together; eta_U(U_e) . Q(U) = 0 for all U."""
    states = resolve_states(model, sample)
    if equilibria is None:
        equilibria = find_equilibria(model, states)
    worst = Worst()
    parts = {"at_equilibrium": 0.0, "off_equilibrium": 0.0, "orthogonality": 0.0}
    for U_e in equilibria:
        Q = model.source(U_e)
        L = model.dissipation_matrix(U_e)
        gradient = model.entropy_gradient(U_e)
        scale = (1.0 + np.abs(L).max()) * (1.0 + np.linalg.norm(gradient))
        residual = max(
            np.linalg.norm(Q), abs(gradient @ Q), np.linalg.norm(L @ gradient)
        ) / scale
        parts["at_equilibrium"] = max(parts["at_equilibrium"], float(residual))
        worst.update(residual, U_e)
    sources = np.array([model.source(U) for U in states]).reshape(len(states), model.n)
    non_negative = 0
    for U, Q in zip(states, sources):
        L = model.dissipation_matrix(U)
        gradient = model.entropy_gradient(U)
        if not off_equilibrium(Q, L, gradient, tol):
            continue
        production = float(gradient @ Q)
        if production >= 0.0:
            non_negative += 1
        residual = max(0.0, production) / (1.0 + Q @ Q)
        parts["off_equilibrium"] = max(parts["off_equilibrium"], residual)
        worst.update(residual, U)
    for U_e in equilibria:
        gradient = model.entropy_gradient(U_e)
        products = np.abs(sources @ gradient)
        scaled = products / ((1.0 + np.linalg.norm(sources, axis=1)) * (1.0 + np.linalg.norm(gradient)))
        if scaled.size:
            index = int(np.argmax(scaled))
            parts["orthogonality"] = max(parts["orthogonality"], float(scaled[index]))
            worst.update(scaled[index], states[index])
    return worst.record(
        "equilibrium_characterizations",
        worst.residual <= tol and non_negative == 0,
        tol,
        equilibria=len(equilibria),
        non_negative_production=non_negative,
        **parts,
    )


def check_equilibrium_jacobian(
    model: ModelSystem, equilibria: Sequence, tol_fd: float = 1e-5, tol: float = 1e-10
) -> CheckRecord:
    """B = Q_U eta_UU^-1 at equilibria is symmetric, negative semi-definite, equal to -L
    and has the kernel of L."""
    worst = Worst()
    parts = {"symmetry": 0.0, "max_eigenvalue": 0.0, "deviation": 0.0, "kernel_angle": 0.0}
    kernel_dimension = model.n - model.r
    for U_e in equilibria:
        require_equilibrium(model, U_e, tol)
        H = model.entropy_hessian(U_e)
        B = scipy.linalg.solve(H, source_jacobian(model, U_e).T, assume_a="sym").T
        L = model.dissipation_matrix(U_e)
        scale = 1.0 + np.abs(B).max()
        residuals = {
            "symmetry": np.abs(B - B.T).max() / scale,
            "max_eigenvalue": max(0.0, scipy.linalg.eigvalsh(0.5 * (B + B.T)).max()) / scale,
            "deviation": np.abs(B + L).max() / (1.0 + np.abs(L).max()),
            "kernel_angle": 0.0,
        }
        if kernel_dimension:
            _, _, vh = scipy.linalg.svd(B)
            kernel_B = vh[model.r :].T
            kernel_L, _ = null_space_basis(L)
            residuals["kernel_angle"] = max_principal_angle(kernel_B, kernel_L)
        for key, value in residuals.items():
            parts[key] = max(parts[key], float(value))
        worst.update(max(residuals.values()), U_e)
    return worst.record(
        "equilibrium_jacobian", worst.residual <= tol_fd, tol_fd, equilibria=len(equilibria), **parts
    )


def check_qv_invertibility(
    model: ModelSystem, equilibria: Sequence, max_condition: float = 1e8, tol: float = 1e-10
) -> CheckRecord:
    worst = Worst()
    if model.r == 0:
        return worst.record("qv_invertibility", True, max_condition, vacuous=True)
    split = model.n - model.r
    for U_e in equilibria:
        require_equilibrium(model, U_e, tol)
        q_v = partitioned_source_jacobian(model, U_e)[split:, split:]
        condition = float(np.linalg.cond(q_v))
        worst.update(condition if np.isfinite(condition) else np.inf, U_e)
    return worst.record(
        "qv_invertibility",
        bool(np.isfinite(worst.residual) and worst.residual <= max_condition),
        max_condition,
        vacuous=False,
        equilibria=len(equilibria),
    )


def check_maxwellian_bounds(
    model: ModelSystem, states: np.ndarray, tol: float = 1e-10, min_bound_ratio: float = 1e-3
) -> CheckRecord:
    """c |U - M(U)| <= |Q(U)| <= C |U - M(U)| over a near-equilibrium sample, with U - M(U)
    orthogonal to the conserved rows and -eta_U . Q / |U - M|^2 > 0."""
    worst = Worst()
    rows = model.conserved_rows
    ratios: List[float] = []
    dissipation: List[float] = []
    failures = 0
    states = np.atleast_2d(states)
    for U in states:
        result = maxwellian(model, U, strict=False)
        if not result.converged:
            LOGGER.warning(f"Maxwellian unavailable for a sample of {model.model_id}: {result.error}")
            failures += 1
            continue
        difference = U - result.M
        distance = float(np.linalg.norm(difference))
        residual = (
            float(np.linalg.norm(rows @ difference)) / (1.0 + np.linalg.norm(U)) if rows.size else 0.0
        )
        worst.update(residual, U)
        if distance <= 1e-12 * (1.0 + np.linalg.norm(U)):
            continue
        Q = model.source(U)
        ratios.append(float(np.linalg.norm(Q)) / distance)
        dissipation.append(-float(model.entropy_gradient(U) @ Q) / distance**2)
    evaluated = len(ratios)
    lower = min(ratios) if ratios else None
    upper = max(ratios) if ratios else None
    passed = worst.residual <= tol and (failures < len(states) or len(states) == 0)
    if ratios:
        passed = passed and lower >= min_bound_ratio and np.isfinite(upper) and min(dissipation) > 0
    return worst.record(
        "maxwellian_bounds",
        passed,
        tol,
        lower_ratio=lower,
        upper_ratio=upper,
        lower_dissipation_ratio=min(dissipation) if dissipation else None,
        upper_dissipation_ratio=max(dissipation) if dissipation else None,
        evaluated=evaluated,
        maxwellian_failures=failures,
        min_bound_ratio=min_bound_ratio,
    )
