import numpy as np
from pydantic import validator

from relaxation_cli.relax.core import ModelSystem

from .repository import ModelParams


class VibrationalGasParams(ModelParams):
    c_v: float = 2.5
    c_r: float = 1.0
    R: float = 1.0
    a: float = 1.0

    @validator("c_v", "c_r", "R", "a")
    def positive(cls, v, field):
        if v <= 0:
            raise ValueError(f"{field.name} must be positive")
        return v


class VibrationalGas(ModelSystem):
    """Lagrangian gas dynamics in vibrational non-equilibrium, U = (nu, u, E, q).

    Two-temperature closure: e = c_v theta_1 + q, q = c_r theta_2, p = R theta_1 / nu,
    relaxation omega(theta) = a theta and entropy eta = -(c_v ln theta_1 + R ln nu + c_r ln theta_2).
    """

    Params = VibrationalGasParams

    def __init__(self, c_v: float = 2.5, c_r: float = 1.0, R: float = 1.0, a: float = 1.0):
        self.c_v = c_v
        self.c_r = c_r
        self.R = R
        self.a = a
        super().__init__(n=4, d=1, r=1)

    @classmethod
    def get_name(cls) -> str:
        return "vibrational_gas"

    @classmethod
    def from_params(cls, params: VibrationalGasParams) -> "VibrationalGas":
        return cls(**params.dict())

    def temperatures(self, U):
        nu, u, E, q = U
        return (E - 0.5 * u * u - q) / self.c_v, q / self.c_r

    def pressure(self, U) -> float:
        theta_1, _ = self.temperatures(U)
        return self.R * theta_1 / U[0]

    def flux(self, U, j):
        u = U[1]
        p = self.pressure(U)
        return np.array([-u, p, p * u, 0.0])

    def source(self, U):
        theta_1, theta_2 = self.temperatures(U)
        return np.array([0.0, 0.0, 0.0, self.a * (theta_1 - theta_2)])

    def entropy(self, U):
        theta_1, theta_2 = self.temperatures(U)
        return float(
            -(self.c_v * np.log(theta_1) + self.R * np.log(U[0]) + self.c_r * np.log(theta_2))
        )

    def entropy_gradient(self, U):
        nu, u = U[0], U[1]
        theta_1, theta_2 = self.temperatures(U)
        return np.array(
            [-self.R / nu, u / theta_1, -1.0 / theta_1, 1.0 / theta_1 - 1.0 / theta_2]
        )

    def entropy_hessian(self, U):
        nu, u, _, q = U
        theta_1, _ = self.temperatures(U)
        g = np.array([-u, 1.0, -1.0])
        H = np.zeros((4, 4))
        H[0, 0] = self.R / nu**2
        H[1:, 1:] = np.diag([1.0 / theta_1, 0.0, self.c_r / q**2]) + np.outer(g, g) / (
            self.c_v * theta_1**2
        )
        return H

    def dissipation_matrix(self, U):
        theta_1, theta_2 = self.temperatures(U)
        L = np.zeros((4, 4))
        L[3, 3] = self.a * theta_1 * theta_2
        return L

    def in_state_space(self, U):
        if not np.all(np.isfinite(U)) or U[0] <= 0:
            return False
        theta_1, theta_2 = self.temperatures(U)
        return bool(theta_1 > 0 and theta_2 > 0)

    def sample_box(self):
        return np.array([[0.5, 2.0], [-1.0, 1.0], [3.0, 8.0], [0.5, 2.0]])

    def reference_state(self):
        # theta_1 = theta_2 = 1 at rest
        return np.array([1.0, 0.0, self.c_v + self.c_r, self.c_r])

    def analytic_flux_jacobian(self, U, j):
        nu, u = U[0], U[1]
        p = self.pressure(U)
        dp = np.empty(4)
        dp[0] = -p / nu
        dp[1:] = self.R / (nu * self.c_v) * np.array([-u, 1.0, -1.0])
        A = np.zeros((4, 4))
        A[0, 1] = -1.0
        A[1] = dp
        A[2] = u * dp
        A[2, 1] += p
        return A

    def analytic_source_jacobian(self, U):
        J = np.zeros((4, 4))
        J[3, 1:] = self.a * np.array([-U[1], 1.0, -1.0]) / self.c_v
        J[3, 3] -= self.a / self.c_r
        return J

    def max_wave_speed(self, U, j):
        gamma = 1.0 + self.R / self.c_v
        return float(np.sqrt(gamma * self.pressure(U) / U[0]))
