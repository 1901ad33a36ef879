"""Deliberately broken fixtures for counterexample sensitivity.

Every mutation records in ``targets`` the verifier checks it must fail; every other
check keeps its verdict on the mutated model. Checks that pass vacuously for the rank of
the base model stay passed.
"""
import logging
from typing import Dict, FrozenSet, Type

import numpy as np

from relaxation_cli.relax.core import DelegatingSystem, ModelSystem

from .repository import ModelParams

LOGGER = logging.getLogger("relaxation-cli")

VACUOUS_UNLESS_RANK_ONE = frozenset({"stability_ratio"})


class Mutation(DelegatingSystem):
    name: str = ""
    targets: FrozenSet[str] = frozenset()

    def __init__(self, base: ModelSystem):
        super().__init__(base, suffix=f"+{self.name}")

    def failing_checks(self) -> FrozenSet[str]:
        if self.base.r != 1:
            return self.targets - VACUOUS_UNLESS_RANK_ONE
        return self.targets


class FlipSource(Mutation):
    """Q -> -Q while L and the entropy stay untouched."""

    name = "flip-source"
    targets = frozenset(
        {
            "source_factorization",
            "dissipation_inequality",
            "equilibrium_characterizations",
            "equilibrium_jacobian",
            "maxwellian_bounds",
            "stability_ratio",
        }
    )

    def source(self, U):
        return -self.base.source(U)

    def analytic_source_jacobian(self, U):
        jacobian = self.base.analytic_source_jacobian(U)
        return None if jacobian is None else -jacobian


class SwapFlux(Mutation):
    """Components of every flux in reverse order; eta_UU F_U loses its symmetry."""

    name = "swap-flux"
    targets = frozenset({"entropy_structure"})

    def flux(self, U, j):
        return self.base.flux(U, j)[::-1].copy()

    def analytic_flux_jacobian(self, U, j):
        jacobian = self.base.analytic_flux_jacobian(U, j)
        return None if jacobian is None else jacobian[::-1].copy()


class NegateDissipation(Mutation):
    name = "negate-dissipation"
    targets = frozenset({"source_factorization", "dissipation_inequality", "equilibrium_jacobian"})

    def dissipation_matrix(self, U):
        return -self.base.dissipation_matrix(U)


MUTATIONS: Dict[str, Type[Mutation]] = {
    m.name: m for m in (FlipSource, SwapFlux, NegateDissipation)
}


def apply_mutation(model: ModelSystem, name: str) -> Mutation:
    mutation = MUTATIONS.get(name)
    if mutation is None:
        raise ValueError(f'Unknown mutation "{name}", choose from {sorted(MUTATIONS)}')
    LOGGER.debug(f"Applying mutation {name} to {model.model_id}")
    return mutation(model)


class CrossingRank(ModelSystem):
    """Synthetic system whose L(U) = diag(U_1^2, 1) drops rank on the line U_1 = 0.

    eta = |U - c|^2 / 2 with c = (0.5, 0), F = U, Q = -L(U)(U - c). Sampled U_1 lies on a
    lattice of spacing 0.1 that contains 0, so null space constancy fails with a rank mismatch.
    """

    Params = ModelParams
    targets = frozenset({"null_space_constancy"})
    center = np.array([0.5, 0.0])

    def __init__(self):
        super().__init__(n=2, d=1, r=2)

    @classmethod
    def get_name(cls) -> str:
        return "crossing_rank"

    @classmethod
    def from_params(cls, params: ModelParams) -> "CrossingRank":
        return cls()

    def flux(self, U, j):
        return np.array(U, dtype=float)

    def source(self, U):
        return -self.dissipation_matrix(U) @ (U - self.center)

    def entropy(self, U):
        w = U - self.center
        return float(0.5 * (w @ w))

    def entropy_gradient(self, U):
        return U - self.center

    def entropy_hessian(self, U):
        return np.eye(2)

    def dissipation_matrix(self, U):
        return np.diag([U[0] ** 2, 1.0])

    def in_state_space(self, U):
        return bool(np.all(np.isfinite(U)))

    def sample_box(self):
        return np.array([[-1.0, 1.0], [-1.0, 1.0]])

    def reference_state(self):
        return self.center.copy()

    def draw_state(self, rng):
        return np.array([0.1 * rng.integers(-9, 10), rng.uniform(-1.0, 1.0)])

    def analytic_flux_jacobian(self, U, j):
        return np.eye(2)

    def analytic_source_jacobian(self, U):
        return -np.diag([3.0 * U[0] ** 2 - 2.0 * self.center[0] * U[0], 1.0])

    def max_wave_speed(self, U, j):
        return 1.0
