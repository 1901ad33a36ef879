"""Pointwise structural checks: entropy symmetrization, source factorization, constant
null space, conserved source components and derivative consistency."""
import logging
from typing import Union

import numpy as np
import scipy.linalg

from relaxation_cli.relax.core import ModelSystem, flux_jacobian, max_principal_angle, null_space_basis
from relaxation_cli.relax.core.derivatives import (
    fd_flux_jacobian,
    fd_gradient,
    fd_jacobian,
    fd_source_jacobian,
)
from relaxation_cli.relax.exceptions import RankMismatch, StateSpaceViolation

from .records import CheckRecord, Worst
from .sampling import SampleSpec, resolve_states

LOGGER = logging.getLogger("relaxation-cli")

Sample = Union[SampleSpec, np.ndarray]


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).max() / (1.0 + np.abs(a).max()))


def check_entropy_structure(
    model: ModelSystem, sample: Sample, tol_sym: float = 1e-10, tol_pd: float = 0.0
) -> CheckRecord:
    states = resolve_states(model, sample)
    worst = Worst()
    min_eigenvalue = np.inf
    for U in states:
        H = model.entropy_hessian(U)
        eigenvalue = float(scipy.linalg.eigvalsh(0.5 * (H + H.T)).min())
        min_eigenvalue = min(min_eigenvalue, eigenvalue)
        for j in range(model.d):
            S = H @ flux_jacobian(model, U, j)
            worst.update(_relative(S, S.T), U)
    return worst.record(
        "entropy_structure",
        worst.residual <= tol_sym and min_eigenvalue > tol_pd,
        tol_sym,
        min_hessian_eigenvalue=min_eigenvalue,
        tol_pd=tol_pd,
    )


def check_source_factorization(model: ModelSystem, sample: Sample, tol: float = 1e-10) -> CheckRecord:
    states = resolve_states(model, sample)
    worst = Worst()
    parts = {"factorization": 0.0, "symmetry": 0.0, "negativity": 0.0}
    for U in states:
        Q = model.source(U)
        L = model.dissipation_matrix(U)
        scale = 1.0 + np.abs(L).max()
        residuals = {
            "factorization": np.linalg.norm(Q + L @ model.entropy_gradient(U))
            / (1.0 + np.linalg.norm(Q)),
            "symmetry": np.abs(L - L.T).max() / scale,
            "negativity": max(0.0, -scipy.linalg.eigvalsh(0.5 * (L + L.T)).min()) / scale,
        }
        for key, value in residuals.items():
            parts[key] = max(parts[key], float(value))
        worst.update(max(residuals.values()), U)
    return worst.record("source_factorization", worst.residual <= tol, tol, **parts)


def check_null_space_constancy(
    model: ModelSystem, sample: Sample, tol_angle: float = 1e-8
) -> CheckRecord:
    states = resolve_states(model, sample)
    expected = model.n - model.r
    declared = scipy.linalg.orth(model.conserved_rows.T) if expected else np.zeros((model.n, 0))
    reference = None
    worst = Worst()
    worst_declared = 0.0
    for index, U in enumerate(states):
        basis, singular_values = null_space_basis(model.dissipation_matrix(U))
        if basis.shape[1] != expected:
            raise RankMismatch(
                f"ker L has dimension {basis.shape[1]} instead of n - r = {expected} "
                f"at sample {index}",
                detail={"state": U.tolist(), "singular_values": singular_values.tolist()},
            )
        if reference is None:
            reference = basis
        worst.update(max_principal_angle(basis, reference), U)
        worst_declared = max(worst_declared, max_principal_angle(basis, declared))
    passed = worst.residual <= tol_angle and worst_declared <= tol_angle
    worst.residual = max(worst.residual, worst_declared)
    return worst.record(
        "null_space_constancy", passed, tol_angle, kernel_dimension=expected,
        angle_to_declared=worst_declared,
    )


def check_conserved_source_components(
    model: ModelSystem, sample: Sample, tol: float = 1e-10
) -> CheckRecord:
    states = resolve_states(model, sample)
    worst = Worst()
    rows = model.conserved_rows
    for U in states:
        Q = model.source(U)
        residual = np.linalg.norm(rows @ Q) / (1.0 + np.linalg.norm(Q)) if rows.size else 0.0
        worst.update(residual, U)
    return worst.record(
        "conserved_source_components", worst.residual <= tol, tol, conserved=rows.shape[0]
    )


def check_derivative_consistency(
    model: ModelSystem, sample: Sample, tol_fd: float = 1e-5, limit: int = 100
) -> CheckRecord:
    """Analytic derivatives against central differences on the first ``limit`` states."""
    states = resolve_states(model, sample)[:limit]
    worst = Worst()
    parts = {"flux_jacobian": 0.0, "entropy_gradient": 0.0, "entropy_hessian": 0.0, "source_jacobian": 0.0}
    skipped = 0
    for U in states:
        try:
            residuals = {
                "entropy_gradient": _relative(
                    model.entropy_gradient(U), fd_gradient(model.entropy, U, model.in_state_space)
                ),
                "entropy_hessian": _relative(
                    model.entropy_hessian(U),
                    fd_jacobian(model.entropy_gradient, U, model.in_state_space),
                ),
            }
            for j in range(model.d):
                analytic = model.analytic_flux_jacobian(U, j)
                if analytic is not None:
                    residuals["flux_jacobian"] = max(
                        residuals.get("flux_jacobian", 0.0),
                        _relative(analytic, fd_flux_jacobian(model, U, j)),
                    )
            analytic = model.analytic_source_jacobian(U)
            if analytic is not None:
                residuals["source_jacobian"] = _relative(analytic, fd_source_jacobian(model, U))
        except StateSpaceViolation:
            skipped += 1
            continue
        for key, value in residuals.items():
            parts[key] = max(parts[key], value)
        worst.update(max(residuals.values()), U)
    return worst.record(
        "derivative_consistency", worst.residual <= tol_fd, tol_fd, skipped=skipped, **parts
    )
