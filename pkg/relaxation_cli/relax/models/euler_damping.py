from typing import Optional

import numpy as np
from pydantic import validator

try:
    from typing import Literal
except ImportError:  # pragma: no cover
    from typing_extensions import Literal

from relaxation_cli.relax.core import ModelSystem
from relaxation_cli.relax.exceptions import InvalidPressureLaw

from .repository import ModelParams


class PressureLaw:
    """p(rho) = scale * rho (isothermal) or scale * rho**gamma (gamma-law).

    ``stored_energy`` is the double integral W(rho) with W'' = p'/rho, fixed so that
    the isothermal case reads scale * (rho ln rho - rho).
    """

    def __init__(self, kind: str = "isothermal", gamma: float = 1.0, scale: float = 1.0):
        if kind not in ("isothermal", "gamma-law"):
            raise InvalidPressureLaw(f"Unknown pressure law kind: {kind}")
        if scale <= 0 or gamma < 1:
            raise InvalidPressureLaw(
                f"Pressure law must be strictly increasing (scale={scale}, gamma={gamma})"
            )
        if kind == "gamma-law" and gamma == 1.0:
            kind = "isothermal"
        self.kind = kind
        self.gamma = 1.0 if kind == "isothermal" else float(gamma)
        self.scale = float(scale)

    @property
    def isothermal(self) -> bool:
        return self.kind == "isothermal"

    def pressure(self, rho: float) -> float:
        return self.scale * rho**self.gamma

    def derivative(self, rho: float) -> float:
        return self.scale * self.gamma * rho ** (self.gamma - 1.0)

    def stored_energy(self, rho: float) -> float:
        if self.isothermal:
            return self.scale * (rho * np.log(rho) - rho)
        return self.scale * rho**self.gamma / (self.gamma - 1.0)

    def stored_energy_derivative(self, rho: float) -> float:
        if self.isothermal:
            return self.scale * np.log(rho)
        return self.scale * self.gamma * rho ** (self.gamma - 1.0) / (self.gamma - 1.0)

    def stored_energy_second_derivative(self, rho: float) -> float:
        return self.derivative(rho) / rho

    def check(self, rho_min: float, rho_max: float) -> None:
        for rho in np.linspace(rho_min, rho_max, 17):
            if not self.derivative(rho) > 0:
                raise InvalidPressureLaw(f"p'(rho) <= 0 at rho={rho}")


class EulerDampingParams(ModelParams):
    d: int = 1
    law: Literal["isothermal", "gamma-law"] = "isothermal"
    gamma: float = 1.0
    scale: float = 1.0

    @validator("d")
    def spatial_dimension(cls, v):
        if v not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        return v


class EulerDamping(ModelSystem):
    """Euler equations with damping: U = (rho, m), Q = (0, -m), L = diag(0, rho I_d)."""

    Params = EulerDampingParams

    RHO_RANGE = (0.5, 2.0)
    MOMENTUM_RANGE = (-1.0, 1.0)

    def __init__(self, d: int = 1, law: Optional[PressureLaw] = None):
        self.law = law or PressureLaw()
        self.law.check(*self.RHO_RANGE)
        super().__init__(n=d + 1, d=d, r=d)

    @classmethod
    def get_name(cls) -> str:
        return "euler_damping"

    @classmethod
    def from_params(cls, params: EulerDampingParams) -> "EulerDamping":
        return cls(d=params.d, law=PressureLaw(params.law, params.gamma, params.scale))

    def _split(self, U):
        return U[0], U[1:]

    def flux(self, U, j):
        rho, m = self._split(U)
        F = np.empty(self.n)
        F[0] = m[j]
        F[1:] = m * m[j] / rho
        F[1 + j] += self.law.pressure(rho)
        return F

    def source(self, U):
        Q = np.zeros(self.n)
        Q[1:] = -U[1:]
        return Q

    def entropy(self, U):
        rho, m = self._split(U)
        return float(m @ m / (2.0 * rho) + self.law.stored_energy(rho))

    def entropy_gradient(self, U):
        rho, m = self._split(U)
        g = np.empty(self.n)
        g[0] = -(m @ m) / (2.0 * rho**2) + self.law.stored_energy_derivative(rho)
        g[1:] = m / rho
        return g

    def entropy_hessian(self, U):
        rho, m = self._split(U)
        H = np.empty((self.n, self.n))
        H[0, 0] = (m @ m) / rho**3 + self.law.stored_energy_second_derivative(rho)
        H[0, 1:] = -m / rho**2
        H[1:, 0] = -m / rho**2
        H[1:, 1:] = np.eye(self.d) / rho
        return H

    def dissipation_matrix(self, U):
        L = np.zeros((self.n, self.n))
        L[1:, 1:] = U[0] * np.eye(self.d)
        return L

    def in_state_space(self, U):
        return bool(np.all(np.isfinite(U)) and U[0] > 0)

    def sample_box(self):
        box = np.empty((self.n, 2))
        box[0] = self.RHO_RANGE
        box[1:] = self.MOMENTUM_RANGE
        return box

    def reference_state(self):
        U = np.zeros(self.n)
        U[0] = 1.0
        return U

    def analytic_flux_jacobian(self, U, j):
        rho, m = self._split(U)
        A = np.zeros((self.n, self.n))
        A[0, 1 + j] = 1.0
        A[1:, 0] = -m * m[j] / rho**2
        A[1 + j, 0] += self.law.derivative(rho)
        A[1:, 1:] = np.eye(self.d) * m[j] / rho
        A[1:, 1 + j] += m / rho
        return A

    def analytic_source_jacobian(self, U):
        J = np.zeros((self.n, self.n))
        J[1:, 1:] = -np.eye(self.d)
        return J

    def max_wave_speed(self, U, j):
        rho, m = self._split(U)
        return abs(m[j] / rho) + np.sqrt(self.law.derivative(rho))

    def flux_cells(self, U, j):
        rho, m = U[:, 0], U[:, 1:]
        F = np.empty_like(U)
        F[:, 0] = m[:, j]
        F[:, 1:] = m * (m[:, j] / rho)[:, None]
        F[:, 1 + j] += self.law.pressure(rho)
        return F

    def source_cells(self, U):
        Q = np.zeros_like(U)
        Q[:, 1:] = -U[:, 1:]
        return Q

    def entropy_cells(self, U):
        rho, m = U[:, 0], U[:, 1:]
        return np.sum(m * m, axis=1) / (2.0 * rho) + self.law.stored_energy(rho)

    def entropy_gradient_cells(self, U):
        rho, m = U[:, 0], U[:, 1:]
        g = np.empty_like(U)
        g[:, 0] = -np.sum(m * m, axis=1) / (2.0 * rho**2) + self.law.stored_energy_derivative(rho)
        g[:, 1:] = m / rho[:, None]
        return g

    def entropy_hessian_cells(self, U):
        rho, m = U[:, 0], U[:, 1:]
        H = np.empty((len(U), self.n, self.n))
        H[:, 0, 0] = np.sum(m * m, axis=1) / rho**3 + self.law.stored_energy_second_derivative(rho)
        H[:, 0, 1:] = -m / (rho**2)[:, None]
        H[:, 1:, 0] = H[:, 0, 1:]
        H[:, 1:, 1:] = np.eye(self.d) / rho[:, None, None]
        return H

    def in_state_space_cells(self, U):
        return np.all(np.isfinite(U), axis=1) & (U[:, 0] > 0)

    def analytic_source_jacobian_cells(self, U):
        J = np.zeros((len(U), self.n, self.n))
        J[:, 1:, 1:] = -np.eye(self.d)
        return J

    def max_wave_speed_cells(self, U, j):
        rho = U[:, 0]
        return np.abs(U[:, 1 + j] / rho) + np.sqrt(self.law.derivative(rho))
