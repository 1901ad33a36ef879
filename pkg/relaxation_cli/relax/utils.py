import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click

from relaxation_cli.relax.checks.records import jsonable
from relaxation_cli.relax.config import RelaxOptions, RunConfig, config_digest, load_run_config
from relaxation_cli.relax.config.utils import config_file_path, merge, omit_none
from relaxation_cli.relax.core import ModelSystem, freeze_dissipation
from relaxation_cli.relax.exceptions import (
    ConstructionError,
    DimensionMismatch,
    StateSpaceViolation,
)
from relaxation_cli.relax.models import build_model
from relaxation_cli.relax.session import RunSession

LOGGER = logging.getLogger("relaxation-cli")


def relax_options(ctx: Optional[click.Context]) -> RelaxOptions:
    obj = (ctx.obj if ctx else None) or {}
    return RelaxOptions(
        **omit_none(
            {
                "out_dir": obj.get("out_dir"),
                "seed": obj.get("seed"),
                "workers": obj.get("workers"),
            }
        )
    )


def prepare_run(
    ctx: Optional[click.Context],
    task: str,
    overrides: Dict[str, Any],
    seed: Optional[int] = None,
) -> Tuple[RelaxOptions, RunConfig]:
    """Resolve options and run description and open the run session.

    Seed precedence: the command's --seed, the global --seed (or RELAX_SEED), the config
    file, 42.
    """
    options = relax_options(ctx)
    seed = seed if seed is not None else options.seed
    if seed is not None:
        overrides = merge(overrides, {"sample": {"seed": seed}})
    obj = (ctx.obj if ctx else None) or {}
    config_path = Path(obj["config"]) if obj.get("config") else config_file_path()
    config = load_run_config(config_path, task, overrides)
    RunSession.start_session(options.out_dir, config_digest(config), config.sample.seed)
    return options, config


def build_run_model(config: RunConfig) -> ModelSystem:
    """The configured model, mutated and frozen as requested; bad parameters are usage errors."""
    try:
        model = build_model(config.model.family, config.model.params, config.mutate)
        if config.freeze_at is not None:
            model = freeze_dissipation(model, config.freeze_at)
    except (ConstructionError, StateSpaceViolation, DimensionMismatch) as e:
        raise click.exceptions.UsageError(f"Invalid model {config.model.family}: {e.message}")
    LOGGER.debug(f"Built {model.model_id} (n={model.n}, d={model.d}, r={model.r})")
    return model


def dump_json(payload: Any) -> str:
    return json.dumps(jsonable(payload), sort_keys=True, indent=2) + "\n"
