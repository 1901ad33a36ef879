from typing import Optional

import numpy as np
from pydantic import validator
from scipy.optimize import brentq

from relaxation_cli.relax.core import ModelSystem
from relaxation_cli.relax.exceptions import SubcharacteristicViolation

from .repository import ModelParams

# below this |x - nu| the divided difference of tanh uses its limit
DIVIDED_DIFFERENCE_GUARD = 1e-8


def _log_cosh(t: float) -> float:
    return float(np.logaddexp(t, -t) - np.log(2.0))


def _sinh_ratio(t: float) -> float:
    if abs(t) < DIVIDED_DIFFERENCE_GUARD:
        return 1.0
    return float(np.sinh(t) / t)


class EquilibriumStress:
    """g(nu) = kappa * nu + beta * tanh(nu); h(nu) = g(nu) - E nu is inverted globally."""

    def __init__(self, E: float, kappa: float, beta: float = 0.0):
        self.E = E
        self.kappa = kappa
        self.beta = beta
        lower = kappa + min(beta, 0.0)
        upper = kappa + max(beta, 0.0)
        if not (0.0 < lower and upper < E):
            raise SubcharacteristicViolation(
                f"0 < g'(nu) < E fails: g' ranges over [{lower}, {upper}] with E={E}"
            )

    @property
    def linear(self) -> bool:
        return self.beta == 0.0

    def g(self, nu: float) -> float:
        return self.kappa * nu + self.beta * np.tanh(nu)

    def g_prime(self, nu: float) -> float:
        return self.kappa + self.beta / np.cosh(nu) ** 2

    def h(self, nu: float) -> float:
        return self.g(nu) - self.E * nu

    def h_inverse(self, y: float) -> float:
        slope = self.kappa - self.E
        if self.linear:
            return y / slope
        a, b = sorted([(y + abs(self.beta)) / slope, (y - abs(self.beta)) / slope])
        if a == b:
            return a
        return brentq(lambda t: self.h(t) - y, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def h_antiderivative(self, t: float) -> float:
        return (self.kappa - self.E) * t * t / 2.0 + self.beta * _log_cosh(t)

    def h_inverse_integral(self, y: float) -> float:
        """Integral of h^-1 from 0 to y, by parts (h(0) = 0)."""
        x = self.h_inverse(y)
        return x * y - self.h_antiderivative(x)

    def g_divided_difference(self, x: float, nu: float) -> float:
        # tanh x - tanh nu = sinh(x - nu) / (cosh x cosh nu)
        return self.kappa + self.beta * _sinh_ratio(x - nu) / (np.cosh(x) * np.cosh(nu))


class ViscoelasticParams(ModelParams):
    E: float = 1.0
    kappa: Optional[float] = None
    beta: float = 0.0

    @validator("E")
    def positive_modulus(cls, v):
        if v <= 0:
            raise ValueError("E must be positive")
        return v


class Viscoelastic(ModelSystem):
    """Isothermal viscoelasticity in Lagrangian coordinates, U = (nu, u, w) with w = p + E nu.

    nu_t - u_x = 0, u_t + p_x = 0, w_t = -p - g(nu). The entropy is
    u^2/2 + E nu^2/2 - w nu - H(-w) with H the integral of h^-1 from 0.
    """

    Params = ViscoelasticParams

    def __init__(self, E: float = 1.0, kappa: Optional[float] = None, beta: float = 0.0):
        self.E = E
        self.stress = EquilibriumStress(E, E / 2.0 if kappa is None else kappa, beta)
        super().__init__(n=3, d=1, r=1)

    @classmethod
    def get_name(cls) -> str:
        return "viscoelastic"

    @classmethod
    def from_params(cls, params: ViscoelasticParams) -> "Viscoelastic":
        return cls(**params.dict())

    def pressure(self, U) -> float:
        return U[2] - self.E * U[0]

    def flux(self, U, j):
        return np.array([-U[1], self.pressure(U), 0.0])

    def source(self, U):
        nu = U[0]
        return np.array([0.0, 0.0, -self.pressure(U) - self.stress.g(nu)])

    def entropy(self, U):
        nu, u, w = U
        return float(
            0.5 * u * u + 0.5 * self.E * nu * nu - w * nu - self.stress.h_inverse_integral(-w)
        )

    def entropy_gradient(self, U):
        nu, u, w = U
        return np.array([self.E * nu - w, u, self.stress.h_inverse(-w) - nu])

    def entropy_hessian(self, U):
        x = self.stress.h_inverse(-U[2])
        H = np.zeros((3, 3))
        H[0, 0] = self.E
        H[0, 2] = H[2, 0] = -1.0
        H[1, 1] = 1.0
        H[2, 2] = 1.0 / (self.E - self.stress.g_prime(x))
        return H

    def dissipation_matrix(self, U):
        nu, _, w = U
        x = self.stress.h_inverse(-w)
        # -(h(x) - h(nu)) / (x - nu)
        L = np.zeros((3, 3))
        L[2, 2] = self.E - self.stress.g_divided_difference(x, nu)
        return L

    def in_state_space(self, U):
        return bool(np.all(np.isfinite(U)) and U[0] > 0)

    def sample_box(self):
        return np.array([[0.5, 2.0], [-1.0, 1.0], [-1.0, 2.0]])

    def reference_state(self):
        return np.array([1.0, 0.0, -self.stress.h(1.0)])

    def analytic_flux_jacobian(self, U, j):
        return np.array([[0.0, -1.0, 0.0], [-self.E, 0.0, 1.0], [0.0, 0.0, 0.0]])

    def analytic_source_jacobian(self, U):
        J = np.zeros((3, 3))
        J[2, 0] = self.E - self.stress.g_prime(U[0])
        J[2, 2] = -1.0
        return J

    def max_wave_speed(self, U, j):
        return float(np.sqrt(self.E))
