from .options import (
    MaxwellianOptions,
    ModelSpec,
    RelaxOptions,
    RunConfig,
    SampleOptions,
    SolverOptions,
    SweepOptions,
)
from .parser import config_digest, load_run_config, parse_config, serialize_config
from .template import generate_yaml
from .utils import omit_none, repr_errors, update_config
