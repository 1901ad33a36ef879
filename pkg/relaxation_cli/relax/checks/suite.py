import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from relaxation_cli.relax.core import (
    ModelSystem,
    apply_linear_transform,
    max_principal_angle,
    null_space_basis,
    random_transform,
)
from relaxation_cli.relax.types import VerificationReportDict

from .dissipation import check_dissipation_inequality, check_stability_ratio
from .equilibrium import (
    check_equilibrium_characterizations,
    check_equilibrium_jacobian,
    check_maxwellian_bounds,
    check_qv_invertibility,
    find_equilibria,
)
from .records import CheckRecord, Tolerances, Worst, jsonable
from .sampling import SampleSpec, draw_sample, near_equilibrium_sample
from .structure import (
    check_conserved_source_components,
    check_derivative_consistency,
    check_entropy_structure,
    check_null_space_constancy,
    check_source_factorization,
)

LOGGER = logging.getLogger("relaxation-cli")

CHECK_NAMES = (
    "entropy_structure",
    "source_factorization",
    "null_space_constancy",
    "dissipation_inequality",
    "equilibrium_characterizations",
    "equilibrium_jacobian",
    "qv_invertibility",
    "maxwellian_bounds",
    "derivative_consistency",
    "conserved_source_components",
    "stability_ratio",
    "transform_invariance",
)

# principal angle allowed between ker L~(P U) and P^-T ker L(U)
TRANSFORMED_KERNEL_ANGLE = 1e-6
TRANSFORMED_KERNEL_STATES = 50


@dataclass
class VerificationReport:
    model_id: str
    sample: Dict
    tolerances: Dict[str, float]
    checks: List[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> CheckRecord:
        return next(c for c in self.checks if c.name == name)

    def verdicts(self) -> Dict[str, bool]:
        return {c.name: c.passed for c in self.checks}

    def to_dict(self) -> VerificationReportDict:
        return jsonable(
            {
                "model_id": self.model_id,
                "sample": self.sample,
                "tolerances": self.tolerances,
                "checks": [c.to_dict() for c in self.checks],
                "passed": self.passed,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _failed(name: str, tolerance: float, error: Exception) -> CheckRecord:
    message = getattr(error, "message", None) or str(error)
    return CheckRecord(
        name=name,
        passed=False,
        worst_residual=float("inf"),
        worst_state=None,
        tolerance=tolerance,
        details=jsonable(getattr(error, "detail", None) or {}),
        error=f"{type(error).__name__}: {message}",
    )


def _guarded(name: str, tolerance: float, check: Callable[[], CheckRecord]) -> CheckRecord:
    try:
        return check()
    except Exception as e:
        LOGGER.warning(f"Check {name} raised {type(e).__name__}: {e}")
        return _failed(name, tolerance, e)


def _available(value: Union[np.ndarray, Exception]) -> np.ndarray:
    if isinstance(value, Exception):
        raise value
    return value


def _base_checks(
    model: ModelSystem,
    states: Union[np.ndarray, Exception],
    near: Union[np.ndarray, Exception],
    tol: Tolerances,
) -> List[CheckRecord]:
    """Every check but transform invariance, in CHECK_NAMES order.

    ``states`` or ``near`` may be the error that stopped their sampling; every check that
    needs them then records that error.
    """
    try:
        found = find_equilibria(model, _available(states))
    except Exception as e:
        found = e

    def sampled():
        return _available(states)

    def equilibrium_states():
        return _available(found)

    plan: List[Tuple[str, float, Callable[[], CheckRecord]]] = [
        (
            "entropy_structure",
            tol.analytic,
            lambda: check_entropy_structure(model, sampled(), tol.analytic, tol.pd),
        ),
        (
            "source_factorization",
            tol.analytic,
            lambda: check_source_factorization(model, sampled(), tol.analytic),
        ),
        (
            "null_space_constancy",
            tol.angle,
            lambda: check_null_space_constancy(model, sampled(), tol.angle),
        ),
        (
            "dissipation_inequality",
            tol.analytic,
            lambda: check_dissipation_inequality(model, sampled(), tol.analytic),
        ),
        (
            "equilibrium_characterizations",
            tol.analytic,
            lambda: check_equilibrium_characterizations(
                model, sampled(), tol.analytic, equilibrium_states()
            ),
        ),
        (
            "equilibrium_jacobian",
            tol.fd,
            lambda: check_equilibrium_jacobian(
                model, equilibrium_states(), tol.fd, tol.analytic
            ),
        ),
        (
            "qv_invertibility",
            tol.max_condition,
            lambda: check_qv_invertibility(
                model, equilibrium_states(), tol.max_condition, tol.analytic
            ),
        ),
        (
            "maxwellian_bounds",
            tol.analytic,
            lambda: check_maxwellian_bounds(
                model, _available(near), tol.analytic, tol.min_bound_ratio
            ),
        ),
        (
            "derivative_consistency",
            tol.fd,
            lambda: check_derivative_consistency(model, sampled(), tol.fd),
        ),
        (
            "conserved_source_components",
            tol.analytic,
            lambda: check_conserved_source_components(model, sampled(), tol.analytic),
        ),
        (
            "stability_ratio",
            tol.analytic,
            lambda: check_stability_ratio(model, sampled(), tol.analytic),
        ),
    ]
    return [_guarded(*item) for item in plan]


def check_transform_invariance(
    model: ModelSystem,
    states: np.ndarray,
    near: Union[np.ndarray, Exception],
    tolerances: Tolerances,
    base_verdicts: Dict[str, bool],
    seed: int,
) -> CheckRecord:
    """Re-run the suite in variables V = P_new U for a random well-conditioned P_new and
    require the same verdicts; ker L~(P_new U) must equal P_new^-T ker L(U)."""
    P_new = random_transform(model.n, np.random.default_rng(seed), tolerances.transform_condition)
    transformed = apply_linear_transform(model, P_new, tolerances.max_condition)
    scaled = tolerances.scaled(transformed.condition)
    near_transformed = near if isinstance(near, Exception) else near @ P_new.T
    records = _base_checks(transformed, states @ P_new.T, near_transformed, scaled)
    mismatched = sorted(r.name for r in records if r.passed != base_verdicts.get(r.name))
    worst = Worst()
    skipped = 0
    for U in states[:TRANSFORMED_KERNEL_STATES]:
        kernel, _ = null_space_basis(model.dissipation_matrix(U))
        kernel_t, _ = null_space_basis(transformed.dissipation_matrix(P_new @ U))
        if kernel.shape[1] != kernel_t.shape[1]:
            skipped += 1
            continue
        expected = np.linalg.solve(P_new.T, kernel)
        worst.update(max_principal_angle(kernel_t, expected) if kernel.shape[1] else 0.0, U)
    return worst.record(
        "transform_invariance",
        not mismatched and worst.residual <= TRANSFORMED_KERNEL_ANGLE,
        TRANSFORMED_KERNEL_ANGLE,
        condition=transformed.condition,
        mismatched=mismatched,
        transformed_verdicts={r.name: r.passed for r in records},
        skipped_kernel_states=skipped,
    )


def run_full_suite(
    model: ModelSystem,
    sample: SampleSpec,
    tolerances: Optional[Tolerances] = None,
    near_equilibrium: int = 100,
    transform_seed: Optional[int] = None,
) -> VerificationReport:
    """All checks on one sample; failures inside a check, or of the sampling a check
    needs, become failed records."""
    tolerances = tolerances or Tolerances()
    report = VerificationReport(
        model_id=model.model_id, sample=sample.echo(), tolerances=tolerances.dict()
    )
    try:
        states = draw_sample(model, sample)
        LOGGER.debug(f"Verifying {model.model_id} on {len(states)} states")
    except Exception as e:
        LOGGER.warning(f"Sampling {model.model_id} failed: {type(e).__name__}: {e}")
        states = e
    try:
        near, failures = near_equilibrium_sample(model, sample, near_equilibrium)
        if failures:
            LOGGER.warning(f"{failures} equilibrium solves failed while sampling near equilibrium")
    except Exception as e:
        LOGGER.warning(f"Near-equilibrium sampling failed: {type(e).__name__}: {e}")
        near = e
    report.checks.extend(_base_checks(model, states, near, tolerances))
    seed = sample.seed if transform_seed is None else transform_seed
    report.checks.append(
        _guarded(
            "transform_invariance",
            TRANSFORMED_KERNEL_ANGLE,
            lambda: check_transform_invariance(
                model, _available(states), near, tolerances, report.verdicts(), seed
            ),
        )
    )
    passed = sum(c.passed for c in report.checks)
    LOGGER.debug(f"{model.model_id}: {passed}/{len(report.checks)} checks passed")
    return report
