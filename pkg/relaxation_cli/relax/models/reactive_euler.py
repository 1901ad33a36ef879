import logging
from typing import List, Optional

import numpy as np
import scipy.linalg
from pydantic import root_validator, validator
from scipy.optimize import brentq
from scipy.special import exprel

from relaxation_cli.relax.core import ModelSystem
from relaxation_cli.relax.exceptions import ConstructionError

from .gas import euler_flux, euler_flux_jacobian, gas_entropy_gradient, gas_entropy_hessian
from .repository import ModelParams

LOGGER = logging.getLogger("relaxation-cli")


class ReactionNetwork:
    """Species data and reversible reactions sum_k nu'_ki S_k <=> sum_k nu''_ki S_k.

    ``heat_capacities[k]`` holds polynomial coefficients of c_vk(theta) in increasing
    degree. Forward rates are Arrhenius, K_f = k0 theta^beta exp(-E_a / (R_g theta));
    reverse rates always follow from the equilibrium constant.
    """

    def __init__(
        self,
        molar_masses,
        forward_stoichiometry,
        reverse_stoichiometry,
        formation_energies,
        heat_capacities,
        entropy_constants=None,
        element_matrix=None,
        prefactors=None,
        temperature_exponents=None,
        activation_energies=None,
        R_g: float = 1.0,
        theta_0: float = 0.2,
    ):
        self.m = np.array(molar_masses, dtype=float)
        self.nu_forward = np.array(forward_stoichiometry, dtype=float)
        self.nu_reverse = np.array(reverse_stoichiometry, dtype=float)
        self.n_s = self.m.size
        if self.nu_forward.ndim != 2 or self.nu_forward.shape[0] != self.n_s:
            raise ConstructionError("Stoichiometric matrices must be n_s x n_r")
        if self.nu_reverse.shape != self.nu_forward.shape:
            raise ConstructionError("Forward and reverse stoichiometry differ in shape")
        self.n_r = self.nu_forward.shape[1]
        self.nu = self.nu_reverse - self.nu_forward
        self.epsilon_0 = np.array(formation_energies, dtype=float)
        self.c_v = [np.array(c, dtype=float) for c in heat_capacities]
        self.s_0 = (
            np.zeros(self.n_s) if entropy_constants is None else np.array(entropy_constants, float)
        )
        self.elements = None if element_matrix is None else np.array(element_matrix, dtype=float)
        self.k0 = np.ones(self.n_r) if prefactors is None else np.array(prefactors, float)
        self.beta = (
            np.zeros(self.n_r) if temperature_exponents is None else np.array(temperature_exponents, float)
        )
        self.E_a = (
            np.ones(self.n_r) if activation_energies is None else np.array(activation_energies, float)
        )
        self.R_g = R_g
        self.theta_0 = theta_0
        self.r = R_g / self.m
        self.validate()

    def validate(self) -> None:
        if np.any(self.m <= 0):
            raise ConstructionError("Molar masses must be positive")
        for nu in (self.nu_forward, self.nu_reverse):
            if np.any(nu < 0) or np.any(nu != np.round(nu)):
                raise ConstructionError("Stoichiometric coefficients must be non-negative integers")
        if len(self.c_v) != self.n_s or any(c.size == 0 for c in self.c_v):
            raise ConstructionError("Every species needs heat capacity coefficients")
        if self.elements is not None:
            if self.elements.shape[0] != self.n_s:
                raise ConstructionError("Element matrix must have one row per species")
            imbalance = self.nu.T @ self.elements
            if np.abs(imbalance).max() > 0:
                raise ConstructionError(
                    "Element conservation fails", detail={"imbalance": imbalance.tolist()}
                )
        mass_balance = self.m @ self.nu
        if np.abs(mass_balance).max() > 1e-12 * self.m.max():
            raise ConstructionError(
                "Reactions do not conserve mass", detail={"imbalance": mass_balance.tolist()}
            )
        grid = np.linspace(self.theta_0, 20.0 * self.theta_0, 40)
        if any(np.any(np.polynomial.polynomial.polyval(grid, c) <= 0) for c in self.c_v):
            raise ConstructionError("Heat capacities must stay positive above theta_0")

    @property
    def constant_heat_capacities(self) -> bool:
        return all(c.size == 1 for c in self.c_v)

    def heat_capacity(self, theta: float) -> np.ndarray:
        return np.array([np.polynomial.polynomial.polyval(theta, c) for c in self.c_v])

    def internal_energy(self, theta: float) -> np.ndarray:
        """epsilon_k(theta) = epsilon_k^0 + integral of c_vk from theta_0."""
        out = self.epsilon_0.copy()
        for k, c in enumerate(self.c_v):
            powers = np.arange(1, c.size + 1)
            out[k] += np.sum(c * (theta**powers - self.theta_0**powers) / powers)
        return out

    def thermal_entropy(self, theta: float) -> np.ndarray:
        """s_k^0 + integral of c_vk / y from theta_0 (concentration-free part of s_k)."""
        out = self.s_0.copy()
        for k, c in enumerate(self.c_v):
            out[k] += c[0] * np.log(theta / self.theta_0)
            if c.size > 1:
                powers = np.arange(1, c.size)
                out[k] += np.sum(c[1:] * (theta**powers - self.theta_0**powers) / powers)
        return out

    def forward_rates(self, theta: float) -> np.ndarray:
        return self.k0 * theta**self.beta * np.exp(-self.E_a / (self.R_g * theta))

    def standard_potentials(self, theta: float) -> np.ndarray:
        """Chemical potentials at unit concentration rho_k / m_k = 1."""
        return self.internal_energy(theta) + self.r * theta - self.thermal_entropy(theta) * theta

    def equilibrium_constants(self, theta: float) -> np.ndarray:
        mu_0 = self.standard_potentials(theta)
        return np.exp(-(self.nu.T @ (mu_0 / (self.r * theta))))


class ReactiveEulerParams(ModelParams):
    molar_masses: List[float] = [1.0, 1.0]
    forward_stoichiometry: List[List[float]] = [[1.0], [0.0]]
    reverse_stoichiometry: List[List[float]] = [[0.0], [1.0]]
    formation_energies: List[float] = [0.0, -0.2]
    heat_capacities: List[List[float]] = [[1.5], [1.5]]
    entropy_constants: Optional[List[float]] = None
    element_matrix: Optional[List[List[float]]] = [[1.0], [1.0]]
    prefactors: Optional[List[float]] = None
    temperature_exponents: Optional[List[float]] = None
    activation_energies: Optional[List[float]] = None
    R_g: float = 1.0
    theta_0: float = 0.2

    @validator("R_g", "theta_0")
    def positive(cls, v, field):
        if v <= 0:
            raise ValueError(f"{field.name} must be positive")
        return v

    @root_validator(skip_on_failure=True)
    def species_count(cls, values):
        n_s = len(values["molar_masses"])
        for key in ("formation_energies", "heat_capacities", "forward_stoichiometry"):
            if len(values[key]) != n_s:
                raise ValueError(f"{key} must have one entry per species ({n_s})")
        return values


class ReactiveEuler(ModelSystem):
    """Multi-component reactive Euler equations, U = (rho_1, ..., rho_ns, m, W).

    p = theta sum_k r_k rho_k, rho e = sum_k rho_k epsilon_k(theta), entropy -sum_k rho_k s_k,
    source (m_k omega_k, 0) with mass-action rates and L = diag(M V Delta V^T M, 0) / R_g.
    """

    Params = ReactiveEulerParams

    def __init__(self, network: Optional[ReactionNetwork] = None):
        self.network = network or ReactionNetwork(**ReactiveEulerParams().dict())
        net = self.network
        n = net.n_s + 4
        self.MV = net.m[:, None] * net.nu
        r = int(np.linalg.matrix_rank(self.MV))
        conserved_species = scipy.linalg.null_space(self.MV.T).T
        reacting = scipy.linalg.orth(self.MV).T
        P = np.zeros((n, n))
        P[: net.n_s - r, : net.n_s] = conserved_species
        P[net.n_s - r : n - r, net.n_s :] = np.eye(4)
        P[n - r :, : net.n_s] = reacting
        super().__init__(n=n, d=3, r=r, transform=P)

    @classmethod
    def get_name(cls) -> str:
        return "reactive_euler"

    @classmethod
    def from_params(cls, params: ReactiveEulerParams) -> "ReactiveEuler":
        return cls(ReactionNetwork(**params.dict()))

    def temperature(self, U) -> float:
        net = self.network
        densities, m, W = U[: net.n_s], U[net.n_s : net.n_s + 3], U[-1]
        internal = W - 0.5 * (m @ m) / densities.sum()
        if net.constant_heat_capacities:
            c = np.array([c[0] for c in net.c_v])
            return net.theta_0 + (internal - densities @ net.epsilon_0) / (densities @ c)

        def residual(theta):
            return densities @ net.internal_energy(theta) - internal

        upper = 2.0 * net.theta_0
        while residual(upper) < 0:
            upper *= 2.0
        return brentq(residual, net.theta_0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def _state(self, U):
        net = self.network
        densities = U[: net.n_s]
        m = U[net.n_s : net.n_s + 3]
        W = U[-1]
        rho = densities.sum()
        theta = self.temperature(U)
        return densities, m, W, rho, m / rho, theta

    def pressure(self, U) -> float:
        densities, _, _, _, _, theta = self._state(U)
        return theta * (self.network.r @ densities)

    def chemical_potentials(self, densities, theta) -> np.ndarray:
        net = self.network
        return net.standard_potentials(theta) + net.r * theta * np.log(densities / net.m)

    def rates_of_progress(self, U) -> np.ndarray:
        net = self.network
        densities, _, _, _, _, theta = self._state(U)
        concentrations = densities / net.m
        forward = net.forward_rates(theta)
        reverse = forward / net.equilibrium_constants(theta)
        return forward * np.prod(concentrations[:, None] ** net.nu_forward, axis=0) - reverse * np.prod(
            concentrations[:, None] ** net.nu_reverse, axis=0
        )

    def production_rates(self, U) -> np.ndarray:
        """omega = sum_i tau_i nu_i (molar)."""
        return self.network.nu @ self.rates_of_progress(U)

    def flux(self, U, j):
        densities, m, W, _, _, _ = self._state(U)
        return euler_flux(densities, m, W, self.pressure(U), j)

    def source(self, U):
        Q = np.zeros(self.n)
        Q[: self.network.n_s] = self.network.m * self.production_rates(U)
        return Q

    def entropy(self, U):
        net = self.network
        densities, _, _, _, _, theta = self._state(U)
        s = net.thermal_entropy(theta) - net.r * np.log(densities / net.m)
        return float(-(densities @ s))

    def entropy_gradient(self, U):
        densities, _, _, _, v, theta = self._state(U)
        return gas_entropy_gradient(self.chemical_potentials(densities, theta), v, theta)

    def entropy_hessian(self, U):
        net = self.network
        densities, _, _, _, v, theta = self._state(U)
        return gas_entropy_hessian(
            densities,
            net.r,
            v,
            theta,
            net.internal_energy(theta),
            densities @ net.heat_capacity(theta),
        )

    def affinity_weights(self, U) -> np.ndarray:
        """Delta_i = K_fi prod_k c_k^nu'_ki * int_0^1 exp(s x_i) ds, x_i = sum_k nu_ki mu_k / (r_k theta)."""
        net = self.network
        densities, _, _, _, _, theta = self._state(U)
        concentrations = densities / net.m
        affinity = net.nu.T @ (self.chemical_potentials(densities, theta) / (net.r * theta))
        forward = net.forward_rates(theta) * np.prod(
            concentrations[:, None] ** net.nu_forward, axis=0
        )
        return forward * exprel(affinity)

    def dissipation_matrix(self, U):
        n_s = self.network.n_s
        L = np.zeros((self.n, self.n))
        L[:n_s, :n_s] = (self.MV * self.affinity_weights(U)) @ self.MV.T / self.network.R_g
        return L

    def in_state_space(self, U):
        net = self.network
        if not np.all(np.isfinite(U)) or np.any(U[: net.n_s] <= 0):
            return False
        densities, m, W = U[: net.n_s], U[net.n_s : net.n_s + 3], U[-1]
        # W above the kinetic energy plus formation energies at theta_0
        return bool(W - 0.5 * (m @ m) / densities.sum() > densities @ net.epsilon_0)

    PRIMITIVE_BOX = {"density": (0.2, 1.0), "velocity": (-0.3, 0.3), "theta": (0.5, 2.0)}

    def _conserved(self, densities, v, theta):
        rho = densities.sum()
        W = densities @ self.network.internal_energy(theta) + 0.5 * rho * (v @ v)
        return np.concatenate([densities, rho * v, [W]])

    def draw_state(self, rng):
        lo, hi = self.PRIMITIVE_BOX["density"]
        densities = rng.uniform(lo, hi, size=self.network.n_s)
        v = rng.uniform(*self.PRIMITIVE_BOX["velocity"], size=3)
        theta = rng.uniform(*self.PRIMITIVE_BOX["theta"])
        return self._conserved(densities, v, theta)

    def sample_box(self):
        n_s = self.network.n_s
        d_lo, d_hi = self.PRIMITIVE_BOX["density"]
        v_max = max(abs(x) for x in self.PRIMITIVE_BOX["velocity"])
        t_lo, t_hi = self.PRIMITIVE_BOX["theta"]
        box = np.empty((self.n, 2))
        box[:n_s] = (d_lo, d_hi)
        box[n_s : n_s + 3] = (-n_s * d_hi * v_max, n_s * d_hi * v_max)
        energies = [self._conserved(np.full(n_s, d), np.zeros(3), t)[-1] for d in (d_lo, d_hi) for t in (t_lo, t_hi)]
        box[-1] = (min(energies), max(energies) + 1.5 * n_s * d_hi * v_max**2)
        return box

    def reference_state(self):
        net = self.network
        theta = 1.0
        mu_0 = net.standard_potentials(theta)
        # a non-equilibrium composition keeps every reaction active
        densities = net.m * np.exp(-mu_0 / (net.r * theta))
        densities = 0.5 * densities / densities.sum() * (1.0 + 0.1 * np.arange(net.n_s))
        return self._conserved(densities, np.zeros(3), theta)

    def analytic_flux_jacobian(self, U, j):
        net = self.network
        densities, m, W, rho, v, theta = self._state(U)
        theta_U = np.concatenate([0.5 * (v @ v) - net.internal_energy(theta), -v, [1.0]])
        theta_U /= densities @ net.heat_capacity(theta)
        p_U = (net.r @ densities) * theta_U
        p_U[: net.n_s] += theta * net.r
        return euler_flux_jacobian(densities, m, W, self.pressure(U), p_U, j)
