from typing import List, Optional

import numpy as np
from pydantic import validator

from relaxation_cli.relax.core import ModelSystem
from relaxation_cli.relax.exceptions import ConstructionError

from .gas import euler_flux, euler_flux_jacobian, gas_entropy_gradient, gas_entropy_hessian
from .repository import ModelParams

# relative gap |x - theta| / theta below which the Planck divided difference is expanded
PLANCK_GUARD = 1e-8


class PlanckLaw:
    """B(theta) = a * theta**k with inverse b(y) = (y / a)**(1/k)."""

    def __init__(self, a: float = 1.0, k: float = 4.0):
        self.a = a
        self.k = k

    def B(self, theta):
        return self.a * theta**self.k

    def b(self, y):
        return (y / self.a) ** (1.0 / self.k)

    def divided_difference(self, x: float, theta: float) -> float:
        """(B(x) - B(theta)) / (x - theta), expanded to second order near x = theta."""
        k = self.k
        if abs(x - theta) < PLANCK_GUARD * theta:
            slope = k * theta ** (k - 1)
            curvature = 0.5 * k * (k - 1) * theta ** (k - 2)
            return self.a * (slope + curvature * (x - theta))
        return (self.B(x) - self.B(theta)) / (x - theta)


class RadiationHydroParams(ModelParams):
    directions: List[List[float]] = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]
    C: float = 1.0
    a_rad: float = 1.0
    k: float = 4.0
    gamma: float = 1.4
    c_v: float = 1.0
    theta_0: float = 0.5

    @validator("C", "a_rad", "c_v", "theta_0")
    def positive(cls, v, field):
        if v <= 0:
            raise ValueError(f"{field.name} must be positive")
        return v

    @validator("k")
    def planck_exponent(cls, v):
        if v <= 1:
            raise ValueError("k must exceed 1")
        return v

    @validator("gamma")
    def adiabatic_exponent(cls, v):
        if v <= 1:
            raise ValueError("gamma must exceed 1")
        return v


class RadiationHydro(ModelSystem):
    """Discrete-ordinate radiation hydrodynamics with an ideal gas.

    U = (rho, m, W, I_1, ..., I_L), W = rho (e + |v|^2/2), e = c_v theta,
    p = (gamma - 1) rho e. Each intensity relaxes to B(theta) at rate rho.
    The entropy is -rho s - C sum_l int_{B(theta_0)}^{I_l} dy / b(y) with
    s = c_v ln theta - R ln rho.
    """

    Params = RadiationHydroParams

    def __init__(
        self,
        directions: Optional[np.ndarray] = None,
        C: float = 1.0,
        a_rad: float = 1.0,
        k: float = 4.0,
        gamma: float = 1.4,
        c_v: float = 1.0,
        theta_0: float = 0.5,
    ):
        if directions is None:
            directions = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]
        directions = np.array(directions, dtype=float)
        if directions.ndim != 2 or directions.shape[1] != 3 or directions.shape[0] < 1:
            raise ConstructionError("Directions must be a non-empty list of 3-vectors")
        if np.abs(np.linalg.norm(directions, axis=1) - 1.0).max() > 1e-12:
            raise ConstructionError("Every direction must have unit length")
        self.directions = directions
        self.L = directions.shape[0]
        self.C = C
        self.planck = PlanckLaw(a_rad, k)
        self.gamma = gamma
        self.c_v = c_v
        self.R = (gamma - 1.0) * c_v
        self.theta_0 = theta_0
        n = self.L + 5
        P = np.eye(n)
        P[4, 5:] = C
        super().__init__(n=n, d=3, r=self.L, transform=P)

    @classmethod
    def get_name(cls) -> str:
        return "radiation_hydro"

    @classmethod
    def from_params(cls, params: RadiationHydroParams) -> "RadiationHydro":
        return cls(**params.dict())

    def _gas(self, U):
        rho = U[0]
        m = U[1:4]
        W = U[4]
        v = m / rho
        e = W / rho - 0.5 * (v @ v)
        theta = e / self.c_v
        return rho, m, W, v, e, theta

    def pressure(self, U) -> float:
        rho, _, _, _, e, _ = self._gas(U)
        return self.R * rho * e / self.c_v

    def specific_entropy(self, rho, theta):
        return self.c_v * np.log(theta) - self.R * np.log(rho)

    def sigma(self, U) -> np.ndarray:
        """sigma_l = (I_l - B(theta)) / (1/theta - 1/b(I_l)), continuous through I_l = B(theta)."""
        theta = self._gas(U)[5]
        x = self.planck.b(U[5:])
        return np.array([theta * xl * self.planck.divided_difference(xl, theta) for xl in x])

    def flux(self, U, j):
        rho, m, W, _, _, _ = self._gas(U)
        p = self.pressure(U)
        gas = euler_flux(np.array([rho]), m, W, p, j)
        return np.concatenate([gas, self.directions[:, j] * U[5:]])

    def source(self, U):
        rho, _, _, _, _, theta = self._gas(U)
        excess = U[5:] - self.planck.B(theta)
        Q = np.zeros(self.n)
        Q[4] = self.C * rho * excess.sum()
        Q[5:] = -rho * excess
        return Q

    def _radiation_entropy(self, intensities):
        kappa = 1.0 - 1.0 / self.planck.k
        weight = self.C * self.planck.a ** (1.0 / self.planck.k) / kappa
        return -weight * (intensities**kappa - self.planck.B(self.theta_0) ** kappa)

    def entropy(self, U):
        rho, _, _, _, _, theta = self._gas(U)
        return float(
            -rho * self.specific_entropy(rho, theta) + self._radiation_entropy(U[5:]).sum()
        )

    def entropy_gradient(self, U):
        rho, _, _, v, e, theta = self._gas(U)
        mu = e + self.R * theta - theta * self.specific_entropy(rho, theta)
        gas = gas_entropy_gradient(np.array([mu]), v, theta)
        return np.concatenate([gas, -self.C / self.planck.b(U[5:])])

    def entropy_hessian(self, U):
        rho, _, _, v, e, theta = self._gas(U)
        H = np.zeros((self.n, self.n))
        H[:5, :5] = gas_entropy_hessian(
            np.array([rho]), np.array([self.R]), v, theta, np.array([e]), rho * self.c_v
        )
        k = self.planck.k
        intensities = U[5:]
        weight = self.C / k * self.planck.a ** (1.0 / k)
        H[5:, 5:] = np.diag(weight * intensities ** (-1.0 - 1.0 / k))
        return H

    def dissipation_matrix(self, U):
        rho = U[0]
        sigma = self.sigma(U)
        L = np.zeros((self.n, self.n))
        L[4, 4] = self.C * sigma.sum()
        L[4, 5:] = -sigma
        L[5:, 4] = -sigma
        L[5:, 5:] = np.diag(sigma / self.C)
        return rho * L

    def in_state_space(self, U):
        if not np.all(np.isfinite(U)) or U[0] <= 0:
            return False
        theta = self._gas(U)[5]
        return bool(theta >= self.theta_0 and np.all(U[5:] >= self.planck.B(self.theta_0)))

    def sample_box(self):
        box = np.empty((self.n, 2))
        box[0] = (0.8, 1.5)
        box[1:4] = (-0.3, 0.3)
        box[4] = (1.5, 3.0)
        box[5:] = (0.1, 10.0)
        return box

    def reference_state(self):
        # at rest with theta = 1 and every intensity at B(1)
        U = np.zeros(self.n)
        U[0] = 1.0
        U[4] = self.c_v
        U[5:] = self.planck.B(1.0)
        return U

    def analytic_flux_jacobian(self, U, j):
        rho, m, W, v, _, _ = self._gas(U)
        p = self.pressure(U)
        p_U = (self.gamma - 1.0) * np.concatenate([[0.5 * (v @ v)], -v, [1.0]])
        A = np.zeros((self.n, self.n))
        A[:5, :5] = euler_flux_jacobian(np.array([rho]), m, W, p, p_U, j)
        A[5:, 5:] = np.diag(self.directions[:, j])
        return A

    def max_wave_speed(self, U, j):
        rho, _, _, v, _, _ = self._gas(U)
        sound = np.sqrt(self.gamma * self.pressure(U) / rho)
        return float(max(abs(v[j]) + sound, np.abs(self.directions[:, j]).max()))
