from jinja2 import Environment

CONFIG_TEMPLATE = """# Ambient settings (also read from RELAX_* environment variables and .env)
relax:
  # Directory receiving reports, CSV files and manifest.json
  out_dir: {{ out_dir }}
  # Worker processes running the eps values of a sweep side by side
  workers: {{ workers }}
  # debug: true

model:
  family: {{ family }}
  # Family parameters, every key has a default fixture value
  # params:
  #   gamma: 1.4

# One of verify, maxwellian, simulate, sweep
task: {{ task }}

# Apply a broken fixture to check that the verifier notices it
# mutate: flip-source

sample:
  count: {{ count }}
  seed: {{ seed }}
  # Equilibrium states drawn around the sample for the Maxwellian bounds
  near_equilibrium: 100
  # Uniform box [lower, upper] per component, overrides the family's sampler
  # box:
  #   - [0.5, 4.0]

tolerances:
  analytic: 1.0e-10
  fd: 1.0e-05
  angle: 1.0e-08
  max_condition: 1.0e+08
  transform_condition: 1.0e+03

maxwellian:
  # state: [1.0, 2.0, 0.5]
  starts: 1
  tol: 1.0e-12

solver:
  mode: {{ mode }}
  eps: {{ eps }}
  cfl: 0.45
  t_final: {{ t_final }}
  cells: {{ cells }}
  snapshots: 10
  # Simplified mode freezes the dissipation matrix here (default: the Maxwellian of the
  # mean initial state)
  # freeze_state: [1.0, 1.0, 1.0]
  initial:
    profile: gaussian
    amplitude: 0.2
    width: 0.1
    equilibrium: true

sweep:
  eps:{% for e in sweep_eps %}
    - {{ e }}{% endfor %}
  norm: sup
  slope_window: [0.8, 1.2]
"""


env = Environment()
template = env.from_string(CONFIG_TEMPLATE)

DEFAULT_CONTEXT = {
    "out_dir": "relax-out",
    "workers": 1,
    "family": "broadwell",
    "task": "verify",
    "count": 1000,
    "seed": 42,
    "mode": "full",
    "eps": 0.1,
    "t_final": 0.5,
    "cells": 200,
    "sweep_eps": [0.1, 0.05, 0.025, 0.0125],
}


def generate_yaml(context) -> str:
    return template.render({**DEFAULT_CONTEXT, **context})
