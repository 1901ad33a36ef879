from typing import Any, Dict, Optional

from relaxation_cli.relax.core import ModelSystem

from .dvm import Broadwell, Carleman, CollisionTable, DiscreteVelocityModel, PlanarBroadwell
from .euler_damping import EulerDamping, PressureLaw
from .mutations import MUTATIONS, CrossingRank, apply_mutation
from .nonlinear_optics import NonlinearOptics
from .radiation_hydro import RadiationHydro
from .reactive_euler import ReactionNetwork, ReactiveEuler
from .repository import ModelParams, ModelRepository
from .vibrational_gas import VibrationalGas
from .viscoelastic import Viscoelastic

# Initializing of ModelRepository singleton
# NOTE: Each new model family should register its class here
repo = ModelRepository()

repo.register_model(EulerDamping)
repo.register_model(NonlinearOptics)
repo.register_model(VibrationalGas)
repo.register_model(Viscoelastic)
repo.register_model(RadiationHydro)
repo.register_model(ReactiveEuler)
repo.register_model(DiscreteVelocityModel)
repo.register_model(Broadwell)
repo.register_model(Carleman)
repo.register_model(PlanarBroadwell)
repo.register_model(CrossingRank)

ModelRepository.set_instance(repo)

# the seven systems certified by the default verification runs
CATALOG = (
    "euler_damping",
    "nonlinear_optics",
    "vibrational_gas",
    "viscoelastic",
    "radiation_hydro",
    "reactive_euler",
    "broadwell",
)


def build_model(
    family: str, params: Optional[Dict[str, Any]] = None, mutate: Optional[str] = None
) -> ModelSystem:
    model = ModelRepository.get_instance().build(family, params)
    if mutate:
        model = apply_mutation(model, mutate)
    return model
