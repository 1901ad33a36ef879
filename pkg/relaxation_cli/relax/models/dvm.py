import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from pydantic import validator
from scipy.special import exprel

from relaxation_cli.relax.core import ModelSystem
from relaxation_cli.relax.exceptions import (
    ConstructionError,
    NonNegativityViolation,
    SymmetryViolation,
)

from .repository import ModelParams

LOGGER = logging.getLogger("relaxation-cli")

Entry = Tuple[int, int, int, int, float]

BROADWELL_VELOCITIES = [[1.0], [0.0], [-1.0]]
BROADWELL_ENTRIES = [(0, 2, 1, 1, 1.0), (2, 0, 1, 1, 1.0), (1, 1, 0, 2, 1.0), (1, 1, 2, 0, 1.0)]


class CollisionTable:
    """Discrete velocities a(k) and collision coefficients A[i, j, k, l] = A_ij^kl.

    The coefficients are stored as a dense n^4 tensor.
    """

    def __init__(self, velocities, coefficients):
        self.velocities = np.array(velocities, dtype=float)
        if self.velocities.ndim != 2 or self.velocities.shape[0] < 2:
            raise ConstructionError("Velocities must be a list of at least two vectors")
        self.n = self.velocities.shape[0]
        self.A = np.array(coefficients, dtype=float)
        if self.A.shape != (self.n,) * 4:
            raise ConstructionError(f"Collision tensor must have shape {(self.n,) * 4}")
        self.validate()
        self.A.setflags(write=False)

    @classmethod
    def from_entries(cls, velocities, entries: Sequence[Entry]) -> "CollisionTable":
        n = len(velocities)
        A = np.zeros((n, n, n, n))
        for i, j, k, l, value in entries:
            if not all(0 <= int(x) < n for x in (i, j, k, l)):
                raise ConstructionError(f"Collision entry {(i, j, k, l)} out of range for n={n}")
            A[int(i), int(j), int(k), int(l)] = value
        return cls(velocities, A)

    def validate(self) -> None:
        if np.any(self.A < 0):
            worst = np.unravel_index(np.argmin(self.A), self.A.shape)
            raise NonNegativityViolation(
                f"Negative collision coefficient at {tuple(int(x) for x in worst)}",
                detail={"value": float(self.A[worst])},
            )
        for label, permuted in (
            ("A_ij^kl = A_kl^ij", self.A.transpose(2, 3, 0, 1)),
            ("A_ij^kl = A_ji^kl", self.A.transpose(1, 0, 2, 3)),
        ):
            if not np.array_equal(self.A, permuted):
                bad = np.argwhere(self.A != permuted)[0]
                raise SymmetryViolation(
                    f"Collision table violates {label} at {tuple(int(x) for x in bad)}"
                )
        if not self.A.any():
            raise ConstructionError("Collision table has no non-zero coefficient")

    def collision_matrix(self) -> np.ndarray:
        """One row e_i + e_j - e_k - e_l per non-zero coefficient."""
        rows = []
        for i, j, k, l in np.argwhere(self.A > 0):
            row = np.zeros(self.n)
            row[i] += 1.0
            row[j] += 1.0
            row[k] -= 1.0
            row[l] -= 1.0
            rows.append(row)
        return np.array(rows)


class DVMParams(ModelParams):
    velocities: List[List[float]] = BROADWELL_VELOCITIES
    entries: List[Tuple[int, int, int, int, float]] = BROADWELL_ENTRIES

    @validator("velocities")
    def same_dimension(cls, v):
        if len({len(a) for a in v}) != 1:
            raise ValueError("all velocities must have the same dimension")
        return v


class DiscreteVelocityModel(ModelSystem):
    """Kinetic model with finitely many velocities, f_t + sum_j a_j(k) f_x = Q(f).

    Q_k = sum_ijl A_ij^kl (f_i f_j - f_k f_l), entropy sum_k f_k (ln f_k - 1). The dissipation
    matrix uses the logarithmic means b_ij^kl of f_i f_j and f_k f_l.
    """

    Params = DVMParams

    def __init__(self, table: CollisionTable, transform: Optional[np.ndarray] = None):
        self.table = table
        self.A = table.A
        self.velocities = table.velocities
        collisions = table.collision_matrix()
        r = int(np.linalg.matrix_rank(collisions))
        if transform is None:
            conserved = scipy.linalg.null_space(collisions).T
            colliding = scipy.linalg.orth(collisions.T).T
            transform = np.vstack([conserved, colliding])
        # sum_ij A_ij^kl, used by the loss term
        self._loss = self.A.sum(axis=(0, 1))
        super().__init__(n=table.n, d=self.velocities.shape[1], r=r, transform=transform)

    @classmethod
    def get_name(cls) -> str:
        return "dvm"

    @classmethod
    def from_params(cls, params: DVMParams) -> "DiscreteVelocityModel":
        return cls(CollisionTable.from_entries(params.velocities, params.entries))

    def flux(self, U, j):
        return self.velocities[:, j] * U

    def source(self, U):
        gain = np.einsum("ijkl,i,j->k", self.A, U, U)
        loss = U * (self._loss @ U)
        return gain - loss

    def entropy(self, U):
        return float(np.sum(U * (np.log(U) - 1.0)))

    def entropy_gradient(self, U):
        return np.log(U)

    def entropy_hessian(self, U):
        return np.diag(1.0 / U)

    def weights(self, U) -> np.ndarray:
        """T[i, j, k, l] = A_ij^kl b_ij^kl with b the logarithmic mean of f_i f_j and f_k f_l."""
        log_f = np.log(U)
        log_pair = log_f[:, None] + log_f[None, :]
        incoming = log_pair[:, :, None, None]
        outgoing = log_pair[None, None, :, :]
        b = np.exp(outgoing) * exprel(incoming - outgoing)
        T = self.A * b
        return 0.5 * (T + T.transpose(2, 3, 0, 1))

    def dissipation_matrix(self, U):
        T = self.weights(U)
        L = (
            -np.einsum("mjkl->km", T)
            - np.einsum("imkl->km", T)
            + np.einsum("ijkm->km", T)
            + np.diag(np.einsum("ijkl->k", T))
        )
        return 0.5 * (L + L.T)

    def in_state_space(self, U):
        return bool(np.all(np.isfinite(U)) and np.all(U > 0))

    def sample_box(self):
        return np.tile([0.5, 4.0], (self.n, 1))

    def reference_state(self):
        return np.ones(self.n)

    def analytic_flux_jacobian(self, U, j):
        return np.diag(self.velocities[:, j])

    def analytic_source_jacobian(self, U):
        gain = np.einsum("mjkl,j->km", self.A, U) + np.einsum("imkl,i->km", self.A, U)
        loss = np.diag(self._loss @ U) + U[:, None] * self._loss
        return gain - loss

    def max_wave_speed(self, U, j):
        return float(np.abs(self.velocities[:, j]).max())

    def flux_cells(self, U, j):
        return U * self.velocities[:, j]

    def source_cells(self, U):
        gain = np.einsum("ijkl,ni,nj->nk", self.A, U, U)
        return gain - U * (U @ self._loss.T)

    def entropy_cells(self, U):
        return np.sum(U * (np.log(U) - 1.0), axis=1)

    def entropy_gradient_cells(self, U):
        return np.log(U)

    def entropy_hessian_cells(self, U):
        return np.einsum("nk,km->nkm", 1.0 / U, np.eye(self.n))

    def in_state_space_cells(self, U):
        return np.all(np.isfinite(U) & (U > 0), axis=1)

    def analytic_source_jacobian_cells(self, U):
        gain = np.einsum("mjkl,nj->nkm", self.A, U) + np.einsum("imkl,ni->nkm", self.A, U)
        loss = np.einsum("nk,km->nkm", U @ self._loss.T, np.eye(self.n))
        return gain - loss - U[:, :, None] * self._loss

    def max_wave_speed_cells(self, U, j):
        return np.full(len(U), np.abs(self.velocities[:, j]).max())


class Broadwell(DiscreteVelocityModel):
    """One-dimensional Broadwell model, speeds (1, 0, -1) and f_+ f_- <=> f_0 f_0."""

    Params = ModelParams

    def __init__(self):
        # mass, momentum, then the collision direction
        transform = np.array(
            [[1.0, 1.0, 1.0], [1.0, 0.0, -1.0], np.array([1.0, -2.0, 1.0]) / np.sqrt(6.0)]
        )
        super().__init__(
            CollisionTable.from_entries(BROADWELL_VELOCITIES, BROADWELL_ENTRIES), transform
        )

    @classmethod
    def get_name(cls) -> str:
        return "broadwell"

    @classmethod
    def from_params(cls, params: ModelParams) -> "Broadwell":
        return cls()


class Carleman(DiscreteVelocityModel):
    """Speeds (1, -1) with f_+ f_+ <=> f_- f_-; only the mass is conserved."""

    Params = ModelParams

    def __init__(self):
        super().__init__(
            CollisionTable.from_entries([[1.0], [-1.0]], [(0, 0, 1, 1, 1.0), (1, 1, 0, 0, 1.0)])
        )

    @classmethod
    def get_name(cls) -> str:
        return "carleman"

    @classmethod
    def from_params(cls, params: ModelParams) -> "Carleman":
        return cls()


class PlanarBroadwell(DiscreteVelocityModel):
    """Two-dimensional four-speed model, f_1 f_2 <=> f_3 f_4 between the two opposite pairs."""

    Params = ModelParams

    def __init__(self):
        velocities = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
        pairs = [(0, 1), (1, 0)]
        entries = [(i, j, k, l, 1.0) for i, j in pairs for k, l in [(2, 3), (3, 2)]]
        entries += [(k, l, i, j, 1.0) for i, j, k, l, _ in entries]
        super().__init__(CollisionTable.from_entries(velocities, entries))

    @classmethod
    def get_name(cls) -> str:
        return "planar_broadwell"

    @classmethod
    def from_params(cls, params: ModelParams) -> "PlanarBroadwell":
        return cls()
