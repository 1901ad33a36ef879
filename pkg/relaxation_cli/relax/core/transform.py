import logging
from typing import Optional

import numpy as np
import scipy.linalg

from relaxation_cli.relax.exceptions import SingularTransform, StateSpaceViolation

from .system import ModelSystem, StateVector, as_state

LOGGER = logging.getLogger("relaxation-cli")

DEFAULT_TRANSFORM_CONDITION_CAP = 1e8


class DelegatingSystem(ModelSystem):
    """A model that forwards every evaluation to ``base``; subclasses override pieces.

    The ``*_cells`` evaluations are not forwarded: they loop over the per-state methods,
    so an override of ``flux`` or ``source`` also holds for whole grids.
    """

    def __init__(
        self, base: ModelSystem, transform: Optional[np.ndarray] = None, suffix: str = ""
    ):
        self.base = base
        self._suffix = suffix
        super().__init__(
            base.n, base.d, base.r, base.transform if transform is None else transform
        )

    @classmethod
    def get_name(cls) -> str:
        return "delegate"

    @property
    def model_id(self) -> str:
        return f"{self.base.model_id}{self._suffix}"

    def flux(self, U, j):
        return self.base.flux(U, j)

    def source(self, U):
        return self.base.source(U)

    def entropy(self, U):
        return self.base.entropy(U)

    def entropy_gradient(self, U):
        return self.base.entropy_gradient(U)

    def entropy_hessian(self, U):
        return self.base.entropy_hessian(U)

    def dissipation_matrix(self, U):
        return self.base.dissipation_matrix(U)

    def in_state_space(self, U):
        return self.base.in_state_space(U)

    def sample_box(self):
        return self.base.sample_box()

    def reference_state(self):
        return self.base.reference_state()

    def analytic_flux_jacobian(self, U, j):
        return self.base.analytic_flux_jacobian(U, j)

    def analytic_source_jacobian(self, U):
        return self.base.analytic_source_jacobian(U)

    def max_wave_speed(self, U, j):
        return self.base.max_wave_speed(U, j)

    def draw_state(self, rng):
        return self.base.draw_state(rng)


class TransformedSystem(DelegatingSystem):
    """The model in the variables V = P_new U.

    Fluxes and source are P_new F_j(P_new^-1 V) and P_new Q(P_new^-1 V), the entropy is
    eta(P_new^-1 V) and the dissipation matrix becomes P_new L P_new^T. The partition
    transform of the new model is P P_new^-1, so P~ V = P U.
    """

    def __init__(self, base: ModelSystem, P_new: np.ndarray):
        P_new = np.array(P_new, dtype=float)
        self._P_new = P_new
        self._P_new_lu = scipy.linalg.lu_factor(P_new)
        self.condition = float(np.linalg.cond(P_new))
        transform = np.linalg.solve(P_new.T, base.transform.T).T
        super().__init__(base, transform=transform, suffix="+transform")

    @property
    def P_new(self) -> np.ndarray:
        return self._P_new

    def to_base(self, V: StateVector) -> StateVector:
        return scipy.linalg.lu_solve(self._P_new_lu, V)

    def from_base(self, U: StateVector) -> StateVector:
        return self._P_new @ U

    def _conjugate(self, matrix: np.ndarray) -> np.ndarray:
        # P_new M P_new^-1
        return scipy.linalg.lu_solve(self._P_new_lu, (self._P_new @ matrix).T, trans=1).T

    def _congruence_inverse(self, matrix: np.ndarray) -> np.ndarray:
        # P_new^-T M P_new^-1
        left = scipy.linalg.lu_solve(self._P_new_lu, matrix, trans=1)
        return scipy.linalg.lu_solve(self._P_new_lu, left.T, trans=1).T

    def flux(self, V, j):
        return self._P_new @ self.base.flux(self.to_base(V), j)

    def source(self, V):
        return self._P_new @ self.base.source(self.to_base(V))

    def entropy(self, V):
        return self.base.entropy(self.to_base(V))

    def entropy_gradient(self, V):
        return scipy.linalg.lu_solve(
            self._P_new_lu, self.base.entropy_gradient(self.to_base(V)), trans=1
        )

    def entropy_hessian(self, V):
        return self._congruence_inverse(self.base.entropy_hessian(self.to_base(V)))

    def dissipation_matrix(self, V):
        return self._P_new @ self.base.dissipation_matrix(self.to_base(V)) @ self._P_new.T

    def in_state_space(self, V):
        V = np.asarray(V, dtype=float)
        return bool(np.all(np.isfinite(V))) and self.base.in_state_space(self.to_base(V))

    def sample_box(self):
        box = self.base.sample_box()
        center = 0.5 * (box[:, 0] + box[:, 1])
        radius = 0.5 * (box[:, 1] - box[:, 0])
        mid = self._P_new @ center
        spread = np.abs(self._P_new) @ radius
        return np.column_stack([mid - spread, mid + spread])

    def reference_state(self):
        return self._P_new @ self.base.reference_state()

    def analytic_flux_jacobian(self, V, j):
        jacobian = self.base.analytic_flux_jacobian(self.to_base(V), j)
        return None if jacobian is None else self._conjugate(jacobian)

    def analytic_source_jacobian(self, V):
        jacobian = self.base.analytic_source_jacobian(self.to_base(V))
        return None if jacobian is None else self._conjugate(jacobian)

    def max_wave_speed(self, V, j):
        return self.base.max_wave_speed(self.to_base(V), j)

    def draw_state(self, rng):
        return self._P_new @ self.base.draw_state(rng)


class FrozenDissipationSystem(DelegatingSystem):
    """Simplified system: source -L(U_*) eta_U(U) with L frozen at U_*."""

    def __init__(self, base: ModelSystem, frozen_state: StateVector):
        frozen_state = as_state(base, frozen_state)
        if not base.in_state_space(frozen_state):
            raise StateSpaceViolation(
                f"Freeze state is outside the state space of {base.model_id}",
                detail={"state": frozen_state.tolist()},
            )
        self.frozen_state = frozen_state
        self._frozen = base.dissipation_matrix(frozen_state)
        self._frozen.setflags(write=False)
        super().__init__(base, suffix="+frozen")

    def source(self, U):
        return -self._frozen @ self.base.entropy_gradient(U)

    def dissipation_matrix(self, U):
        return self._frozen.copy()

    def analytic_source_jacobian(self, U):
        return -self._frozen @ self.base.entropy_hessian(U)

    # everything but the source is the base model's

    def flux_cells(self, U, j):
        return self.base.flux_cells(U, j)

    def source_cells(self, U):
        return -self.base.entropy_gradient_cells(U) @ self._frozen.T

    def entropy_cells(self, U):
        return self.base.entropy_cells(U)

    def entropy_gradient_cells(self, U):
        return self.base.entropy_gradient_cells(U)

    def entropy_hessian_cells(self, U):
        return self.base.entropy_hessian_cells(U)

    def in_state_space_cells(self, U):
        return self.base.in_state_space_cells(U)

    def analytic_source_jacobian_cells(self, U):
        return -self._frozen @ self.base.entropy_hessian_cells(U)

    def max_wave_speed_cells(self, U, j):
        return self.base.max_wave_speed_cells(U, j)


def apply_linear_transform(
    model: ModelSystem,
    P_new: np.ndarray,
    max_condition: float = DEFAULT_TRANSFORM_CONDITION_CAP,
) -> TransformedSystem:
    P_new = np.asarray(P_new, dtype=float)
    if P_new.shape != (model.n, model.n):
        raise SingularTransform(f"Transform must be {model.n}x{model.n}, got {P_new.shape}")
    condition = np.linalg.cond(P_new)
    if not np.isfinite(condition) or condition > max_condition:
        raise SingularTransform(
            f"Transform with condition number {condition:.3e} exceeds the cap {max_condition:.1e}",
            detail={"condition": float(condition)},
        )
    LOGGER.debug(f"Transforming {model.model_id} (condition {condition:.3e})")
    return TransformedSystem(model, P_new)


def freeze_dissipation(model: ModelSystem, frozen_state: StateVector) -> FrozenDissipationSystem:
    return FrozenDissipationSystem(model, frozen_state)


def random_transform(
    n: int, rng: np.random.Generator, condition: float = 1e3
) -> np.ndarray:
    """Random P_new = Q1 diag(s) Q2^T with s in [1, sqrt(condition)]."""
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.exp(rng.uniform(0.0, 0.5 * np.log(condition), size=n))
    return (q1 * s) @ q2.T
