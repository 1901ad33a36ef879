import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from relaxation_cli.relax.exceptions import (
    ConstructionError,
    DimensionMismatch,
    NonFiniteResult,
    RankDeclarationError,
    SingularTransform,
    StateSpaceViolation,
)

from .subspace import RANK_CUTOFF, numerical_rank

LOGGER = logging.getLogger("relaxation-cli")

StateVector = np.ndarray

# construction cap for the stored transform P
MAX_TRANSFORM_CONDITION = 1e12


@dataclass(frozen=True)
class PartitionedState:
    u: np.ndarray
    v: np.ndarray

    def concatenate(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])


class ModelSystem(ABC):
    """Balance law U_t + sum_j F_j(U)_{x_j} = Q(U) with a convex entropy, a factorized
    source Q = -L(U) eta_U(U) and a state-independent null space of L.

    Subclasses set their own parameters first and call ``super().__init__`` last:
    construction validates the transform P and cross-checks the declared rank r
    against the numerical rank of L at ``reference_state()``.
    """

    def __init__(self, n: int, d: int, r: int, transform: Optional[np.ndarray] = None):
        if n <= 0 or d <= 0 or not 0 <= r <= n:
            raise ConstructionError(f"Invalid dimensions n={n}, d={d}, r={r}")
        self.n = n
        self.d = d
        self.r = r
        P = np.eye(n) if transform is None else np.array(transform, dtype=float)
        if P.shape != (n, n):
            raise ConstructionError(f"Transform must be {n}x{n}, got {P.shape}")
        condition = np.linalg.cond(P)
        if not np.isfinite(condition) or condition > MAX_TRANSFORM_CONDITION:
            raise SingularTransform(
                f"Transform of {self.model_id} is numerically singular",
                detail={"condition": float(condition)},
            )
        P.setflags(write=False)
        self._transform = P
        self._transform_lu = scipy.linalg.lu_factor(P)
        self._validate_rank()

    @classmethod
    @abstractmethod
    def get_name(cls) -> str:
        pass

    @property
    def model_id(self) -> str:
        return self.get_name()

    @property
    def transform(self) -> np.ndarray:
        return self._transform

    @property
    def conserved_rows(self) -> np.ndarray:
        """First n - r rows of P; they span ker L."""
        return self._transform[: self.n - self.r]

    def apply_transform_inverse(self, w: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve(self._transform_lu, w)

    def apply_transform_inverse_transpose(self, w: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve(self._transform_lu, w, trans=1)

    # model contract

    @abstractmethod
    def flux(self, U: StateVector, j: int) -> np.ndarray:
        pass

    @abstractmethod
    def source(self, U: StateVector) -> np.ndarray:
        pass

    @abstractmethod
    def entropy(self, U: StateVector) -> float:
        pass

    @abstractmethod
    def entropy_gradient(self, U: StateVector) -> np.ndarray:
        pass

    @abstractmethod
    def entropy_hessian(self, U: StateVector) -> np.ndarray:
        pass

    @abstractmethod
    def dissipation_matrix(self, U: StateVector) -> np.ndarray:
        pass

    @abstractmethod
    def in_state_space(self, U: StateVector) -> bool:
        pass

    @abstractmethod
    def sample_box(self) -> np.ndarray:
        """Per-component sampling intervals, shape (n, 2)."""
        pass

    @abstractmethod
    def reference_state(self) -> StateVector:
        pass

    # optional analytic pieces

    def analytic_flux_jacobian(self, U: StateVector, j: int) -> Optional[np.ndarray]:
        return None

    def analytic_source_jacobian(self, U: StateVector) -> Optional[np.ndarray]:
        return None

    def max_wave_speed(self, U: StateVector, j: int) -> Optional[float]:
        return None

    def draw_state(self, rng: np.random.Generator) -> StateVector:
        box = self.sample_box()
        return rng.uniform(box[:, 0], box[:, 1])

    # evaluations over the rows of an (N, n) array of cell states; models with a
    # closed form override these with array code

    def flux_cells(self, U: np.ndarray, j: int) -> np.ndarray:
        return np.array([self.flux(u, j) for u in U]).reshape(U.shape)

    def source_cells(self, U: np.ndarray) -> np.ndarray:
        return np.array([self.source(u) for u in U]).reshape(U.shape)

    def entropy_cells(self, U: np.ndarray) -> np.ndarray:
        return np.array([self.entropy(u) for u in U], dtype=float)

    def entropy_gradient_cells(self, U: np.ndarray) -> np.ndarray:
        return np.array([self.entropy_gradient(u) for u in U]).reshape(U.shape)

    def entropy_hessian_cells(self, U: np.ndarray) -> np.ndarray:
        return np.array([self.entropy_hessian(u) for u in U]).reshape(len(U), self.n, self.n)

    def in_state_space_cells(self, U: np.ndarray) -> np.ndarray:
        return np.array([self.in_state_space(u) for u in U], dtype=bool)

    def analytic_source_jacobian_cells(self, U: np.ndarray) -> Optional[np.ndarray]:
        return None

    def max_wave_speed_cells(self, U: np.ndarray, j: int) -> Optional[np.ndarray]:
        return None

    def _validate_rank(self) -> None:
        U = self.reference_state()
        L = self.dissipation_matrix(U)
        rank = numerical_rank(L, RANK_CUTOFF)
        if rank != self.r:
            raise RankDeclarationError(
                f"{self.model_id}: declared rank r={self.r} but L has numerical rank {rank}",
                detail={"state": U.tolist()},
            )
        if self.n - self.r == 0:
            return
        scale = max(1.0, float(np.abs(L).max()))
        residual = float(np.abs(L @ self.conserved_rows.T).max())
        if residual > 1e-8 * scale:
            raise ConstructionError(
                f"{self.model_id}: conserved rows of P are not in ker L (residual {residual:.3e})"
            )
        LOGGER.debug(f"Constructed {self.model_id} with n={self.n}, d={self.d}, r={self.r}")


def as_state(model: ModelSystem, U) -> StateVector:
    U = np.asarray(U, dtype=float)
    if U.shape != (model.n,):
        raise DimensionMismatch(
            f"State for {model.model_id} must have length {model.n}, got shape {U.shape}"
        )
    if not np.all(np.isfinite(U)):
        raise NonFiniteResult(f"State for {model.model_id} has non-finite entries")
    return U


def require_in_state_space(model: ModelSystem, U: StateVector) -> StateVector:
    U = as_state(model, U)
    if not model.in_state_space(U):
        raise StateSpaceViolation(
            f"State outside the state space of {model.model_id}", detail={"state": U.tolist()}
        )
    return U


def to_partitioned(model: ModelSystem, U: StateVector) -> PartitionedState:
    w = model.transform @ as_state(model, U)
    split = model.n - model.r
    return PartitionedState(u=w[:split], v=w[split:])


def from_partitioned(model: ModelSystem, p: PartitionedState) -> StateVector:
    w = p.concatenate()
    if w.shape != (model.n,):
        raise DimensionMismatch(
            f"Partitioned state for {model.model_id} must have {model.n} entries"
        )
    U = model.apply_transform_inverse(w)
    if not np.all(np.isfinite(U)):
        raise NonFiniteResult(f"Partitioned state for {model.model_id} is not finite")
    return U


def partitioned_source(model: ModelSystem, U: StateVector) -> np.ndarray:
    """q(u, v): the non-equilibrium block of P Q(U)."""
    return (model.transform @ model.source(U))[model.n - model.r :]


def partitioned_entropy_gradient(model: ModelSystem, U: StateVector) -> np.ndarray:
    """Gradient of eta~(V) = eta(P^-1 V) with respect to V = PU."""
    return model.apply_transform_inverse_transpose(model.entropy_gradient(U))


def partitioned_entropy_hessian(model: ModelSystem, U: StateVector) -> np.ndarray:
    H = model.entropy_hessian(U)
    left = model.apply_transform_inverse_transpose(H)
    return model.apply_transform_inverse_transpose(left.T).T


def transform_inverse(model: ModelSystem) -> np.ndarray:
    return model.apply_transform_inverse(np.eye(model.n))


def partition_cells(model: ModelSystem, U: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(u, v) = P U for every row of U."""
    W = U @ model.transform.T
    split = model.n - model.r
    return W[:, :split], W[:, split:]


def unpartition_cells(model: ModelSystem, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    W = np.concatenate([u, v], axis=1)
    U = model.apply_transform_inverse(W.T).T
    if not np.all(np.isfinite(U)):
        raise NonFiniteResult(f"Partitioned states for {model.model_id} are not finite")
    return U
