import numpy as np

from relaxation_cli.relax.core import ModelSystem

from .repository import ModelParams


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for (i, j, k), sign in {
        (0, 1, 2): 1.0,
        (1, 2, 0): 1.0,
        (2, 0, 1): 1.0,
        (0, 2, 1): -1.0,
        (2, 1, 0): -1.0,
        (1, 0, 2): -1.0,
    }.items():
        eps[i, j, k] = sign
    return eps


LEVI_CIVITA = _levi_civita()


class NonlinearOpticsParams(ModelParams):
    pass


class NonlinearOptics(ModelSystem):
    """Kerr-Debye type optics: U = (D, B, chi) with D = (1 + chi) E.

    D_t - curl B = 0, B_t + curl E = 0, chi_t = |E|^2 - chi, with the entropy
    |D|^2 / (1 + chi) + |B|^2 + chi^2 / 2 and L = diag(0_6, 1).
    """

    Params = NonlinearOpticsParams

    def __init__(self):
        super().__init__(n=7, d=3, r=1)

    @classmethod
    def get_name(cls) -> str:
        return "nonlinear_optics"

    @classmethod
    def from_params(cls, params: NonlinearOpticsParams) -> "NonlinearOptics":
        return cls()

    @staticmethod
    def _split(U):
        return U[0:3], U[3:6], U[6]

    def electric_field(self, U) -> np.ndarray:
        D, _, chi = self._split(U)
        return D / (1.0 + chi)

    def flux(self, U, j):
        _, B, _ = self._split(U)
        E = self.electric_field(U)
        F = np.zeros(self.n)
        F[0:3] = -LEVI_CIVITA[:, j, :] @ B
        F[3:6] = LEVI_CIVITA[:, j, :] @ E
        return F

    def source(self, U):
        E = self.electric_field(U)
        Q = np.zeros(self.n)
        Q[6] = E @ E - U[6]
        return Q

    def entropy(self, U):
        D, B, chi = self._split(U)
        return float(D @ D / (1.0 + chi) + B @ B + 0.5 * chi**2)

    def entropy_gradient(self, U):
        _, B, chi = self._split(U)
        E = self.electric_field(U)
        g = np.empty(self.n)
        g[0:3] = 2.0 * E
        g[3:6] = 2.0 * B
        g[6] = chi - E @ E
        return g

    def entropy_hessian(self, U):
        D, _, chi = self._split(U)
        s = 1.0 + chi
        H = np.zeros((self.n, self.n))
        H[0:3, 0:3] = 2.0 * np.eye(3) / s
        H[0:3, 6] = -2.0 * D / s**2
        H[6, 0:3] = -2.0 * D / s**2
        H[3:6, 3:6] = 2.0 * np.eye(3)
        H[6, 6] = 2.0 * (D @ D) / s**3 + 1.0
        return H

    def dissipation_matrix(self, U):
        L = np.zeros((self.n, self.n))
        L[6, 6] = 1.0
        return L

    def in_state_space(self, U):
        return bool(np.all(np.isfinite(U)) and U[6] > 0)

    def sample_box(self):
        box = np.empty((self.n, 2))
        box[0:6] = (-1.0, 1.0)
        box[6] = (0.1, 10.0)
        return box

    def reference_state(self):
        U = np.zeros(self.n)
        U[6] = 1.0
        return U

    def analytic_flux_jacobian(self, U, j):
        E = self.electric_field(U)
        s = 1.0 + U[6]
        A = np.zeros((self.n, self.n))
        A[0:3, 3:6] = -LEVI_CIVITA[:, j, :]
        A[3:6, 0:3] = LEVI_CIVITA[:, j, :] / s
        A[3:6, 6] = -LEVI_CIVITA[:, j, :] @ E / s
        return A

    def analytic_source_jacobian(self, U):
        D, _, chi = self._split(U)
        s = 1.0 + chi
        J = np.zeros((self.n, self.n))
        J[6, 0:3] = 2.0 * D / s**2
        J[6, 6] = -2.0 * (D @ D) / s**3 - 1.0
        return J
