import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from relaxation_cli.relax.core import ModelSystem, PartitionedState, from_partitioned
from relaxation_cli.relax.exceptions import MaxwellianError, SamplingExhausted
from relaxation_cli.relax.maxwellian import solve_equilibrium_v

LOGGER = logging.getLogger("relaxation-cli")

# rejected draws are resampled up to this many times the requested count
MAX_ATTEMPTS_FACTOR = 100


@dataclass(frozen=True)
class SampleSpec:
    count: int = 1000
    seed: int = 42
    box: Optional[Tuple[Tuple[float, float], ...]] = None

    def echo(self) -> dict:
        return {
            "count": self.count,
            "seed": self.seed,
            "box": None if self.box is None else [list(b) for b in self.box],
        }


def _draw(model: ModelSystem, spec: SampleSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.box is None:
        return model.draw_state(rng)
    box = np.asarray(spec.box, dtype=float)
    return rng.uniform(box[:, 0], box[:, 1])


def draw_sample(model: ModelSystem, spec: SampleSpec) -> np.ndarray:
    """``spec.count`` states of G, shape (count, n); draws outside G are rejected."""
    if spec.box is not None and np.asarray(spec.box).shape != (model.n, 2):
        raise SamplingExhausted(
            f"Sampling box must have {model.n} intervals for {model.model_id}"
        )
    rng = np.random.default_rng(spec.seed)
    states: List[np.ndarray] = []
    attempts = 0
    while len(states) < spec.count:
        if attempts >= MAX_ATTEMPTS_FACTOR * spec.count:
            raise SamplingExhausted(
                f"Only {len(states)} of {spec.count} draws landed in the state space of "
                f"{model.model_id} after {attempts} attempts"
            )
        attempts += 1
        U = _draw(model, spec, rng)
        if model.in_state_space(U):
            states.append(U)
    LOGGER.debug(f"Drew {spec.count} states of {model.model_id} in {attempts} attempts")
    return np.array(states).reshape(spec.count, model.n)


def _ball(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    return radius * rng.uniform() ** (1.0 / dim) * direction


def near_equilibrium_sample(
    model: ModelSystem, spec: SampleSpec, count: int = 100
) -> Tuple[np.ndarray, int]:
    """States (u, h(u) + delta) with u drawn as in ``draw_sample`` and delta uniform in a
    ball of radius 0.1 |h(u)| + 0.01. Returns the states and the number of failed solves."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 1]))
    split = model.n - model.r
    states: List[np.ndarray] = []
    failures = 0
    attempts = 0
    while len(states) < count:
        if attempts >= MAX_ATTEMPTS_FACTOR * count:
            raise SamplingExhausted(
                f"Near-equilibrium sampling of {model.model_id} found only {len(states)} states"
            )
        attempts += 1
        U0 = _draw(model, spec, rng)
        if not model.in_state_space(U0):
            continue
        w = model.transform @ U0
        if model.r == 0:
            states.append(U0)
            continue
        try:
            h = solve_equilibrium_v(model, w[:split], w[split:])
        except MaxwellianError as e:
            LOGGER.debug(f"Skipping near-equilibrium draw: {e.message}")
            failures += 1
            continue
        v = h + _ball(rng, model.r, 0.1 * np.linalg.norm(h) + 0.01)
        U = from_partitioned(model, PartitionedState(u=w[:split], v=v))
        if model.in_state_space(U):
            states.append(U)
    return np.array(states).reshape(count, model.n), failures


def resolve_states(model: ModelSystem, sample: Union[SampleSpec, np.ndarray]) -> np.ndarray:
    if isinstance(sample, SampleSpec):
        return draw_sample(model, sample)
    return np.atleast_2d(np.asarray(sample, dtype=float))
