"""Shared pieces of the compressible Euler models with conserved densities, momentum
and total energy: fluxes, flux Jacobians and the entropy Hessian in natural variables.

The state layout is (rho_1, ..., rho_s, m_1, m_2, m_3, W, extra...) with W = rho E.
"""
import numpy as np


def euler_flux(densities: np.ndarray, m: np.ndarray, W: float, p: float, j: int) -> np.ndarray:
    rho = densities.sum()
    v = m / rho
    return np.concatenate([densities * v[j], m * v[j] + p * np.eye(3)[j], [(W + p) * v[j]]])


def euler_flux_jacobian(
    densities: np.ndarray, m: np.ndarray, W: float, p: float, p_U: np.ndarray, j: int
) -> np.ndarray:
    """d/dU of the Euler flux in direction j.

    Uses dF_j = v_j I + (rho_k, m, W + p) (d v_j) + (0, e_j, v_j) p_U.
    """
    s = densities.size
    size = s + 4
    rho = densities.sum()
    v = m / rho
    dv_j = np.zeros(size)
    dv_j[:s] = -v[j] / rho
    dv_j[s + j] = 1.0 / rho
    carrier = np.concatenate([densities, m, [W + p]])
    pressure_row = np.zeros(size)
    pressure_row[s + j] = 1.0
    pressure_row[-1] = v[j]
    return v[j] * np.eye(size) + np.outer(carrier, dv_j) + np.outer(pressure_row, p_U)


def natural_jacobian(
    densities: np.ndarray, v: np.ndarray, energies: np.ndarray, heat_capacity: float
) -> np.ndarray:
    """dY/dU for Y = (rho_k, v, theta); ``heat_capacity`` is sum_k rho_k c_vk."""
    s = densities.size
    size = s + 4
    rho = densities.sum()
    J = np.zeros((size, size))
    J[:s, :s] = np.eye(s)
    J[s : s + 3, :s] = -np.outer(v, np.ones(s)) / rho
    J[s : s + 3, s : s + 3] = np.eye(3) / rho
    J[-1, :s] = 0.5 * (v @ v) - energies
    J[-1, s : s + 3] = -v
    J[-1, -1] = 1.0
    J[-1] /= heat_capacity
    return J


def gas_entropy_hessian(
    densities: np.ndarray,
    gas_constants: np.ndarray,
    v: np.ndarray,
    theta: float,
    energies: np.ndarray,
    heat_capacity: float,
) -> np.ndarray:
    """(dY/dU)^T diag(r_k / rho_k, rho / theta I_3, sum rho_k c_vk / theta^2) (dY/dU)."""
    rho = densities.sum()
    J = natural_jacobian(densities, v, energies, heat_capacity)
    D = np.concatenate(
        [gas_constants / densities, np.full(3, rho / theta), [heat_capacity / theta**2]]
    )
    return J.T @ (D[:, None] * J)


def gas_entropy_gradient(chemical_potentials: np.ndarray, v: np.ndarray, theta: float) -> np.ndarray:
    return np.concatenate([chemical_potentials - 0.5 * (v @ v), v, [-1.0]]) / theta
