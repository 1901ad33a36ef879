import logging
from typing import Union

import numpy as np
import scipy.linalg

from relaxation_cli.relax.core import (
    ModelSystem,
    partitioned_entropy_gradient,
    partitioned_source,
)

from .records import CheckRecord, Worst
from .sampling import SampleSpec, resolve_states

LOGGER = logging.getLogger("relaxation-cli")

# below this largest eigenvalue L counts as zero and Q itself must vanish
ZERO_EIGENVALUE = 1e-14


def off_equilibrium(Q: np.ndarray, L: np.ndarray, gradient: np.ndarray, tol: float) -> bool:
    return bool(
        np.linalg.norm(Q)
        > tol * (1.0 + np.abs(L).max()) * (1.0 + np.linalg.norm(gradient))
    )


def check_dissipation_inequality(
    model: ModelSystem, sample: Union[SampleSpec, np.ndarray], tol: float = 1e-10
) -> CheckRecord:
    """eta_U . Q + |Q|^2 / lambda <= 0 with lambda the largest eigenvalue of L."""
    states = resolve_states(model, sample)
    worst = Worst()
    degenerate = 0
    for U in states:
        Q = model.source(U)
        L = model.dissipation_matrix(U)
        largest = float(scipy.linalg.eigvalsh(0.5 * (L + L.T)).max())
        q2 = float(Q @ Q)
        if largest >= ZERO_EIGENVALUE:
            residual = max(0.0, float(model.entropy_gradient(U) @ Q) + q2 / largest) / (1.0 + q2)
        else:
            degenerate += 1
            residual = float(np.sqrt(q2))
        worst.update(residual, U)
    return worst.record(
        "dissipation_inequality", worst.residual <= tol, tol, zero_dissipation_states=degenerate
    )


def check_stability_ratio(
    model: ModelSystem, sample: Union[SampleSpec, np.ndarray], tol: float = 1e-10
) -> CheckRecord:
    """For r = 1: q / eta~_v < 0 away from equilibrium. Other ranks pass vacuously."""
    worst = Worst()
    if model.r != 1:
        return worst.record("stability_ratio", True, tol, vacuous=True)
    states = resolve_states(model, sample)
    largest_ratio = -np.inf
    violations = 0
    for U in states:
        Q = model.source(U)
        gradient = model.entropy_gradient(U)
        if not off_equilibrium(Q, model.dissipation_matrix(U), gradient, tol):
            continue
        q = float(partitioned_source(model, U)[0])
        eta_v = float(partitioned_entropy_gradient(model, U)[-1])
        product = q * eta_v
        if product >= 0.0:
            violations += 1
        if eta_v != 0.0:
            largest_ratio = max(largest_ratio, q / eta_v)
        worst.update(max(0.0, product) / (1.0 + q * q), U)
    return worst.record(
        "stability_ratio",
        violations == 0 and worst.residual <= tol,
        tol,
        vacuous=False,
        largest_ratio=largest_ratio,
        violations=violations,
    )
