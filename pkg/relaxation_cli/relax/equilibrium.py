import logging
from typing import Optional

import click
import numpy as np

from relaxation_cli.relax.core import require_in_state_space, to_partitioned
from relaxation_cli.relax.exceptions import (
    DimensionMismatch,
    MaxwellianUnavailable,
    RuntimeFailure,
    StateSpaceViolation,
)
from relaxation_cli.relax.maxwellian import maxwellian, multi_start_maxwellian
from relaxation_cli.relax.session import RunSession, trace
from relaxation_cli.relax.utils import build_run_model, dump_json, prepare_run
from relaxation_cli.util import parse_float_list

LOGGER = logging.getLogger("relaxation-cli")

MAXWELLIAN_NAME = "maxwellian.json"


@click.command("maxwellian")
@click.option("-f", "--family", type=click.STRING, default=None, help="Model family")
@click.option(
    "--state",
    type=click.STRING,
    default=None,
    help="Comma separated state U (default: the family's reference state)",
)
@click.option(
    "--starts",
    type=click.IntRange(min=1),
    default=None,
    help="Number of random initial guesses for the uniqueness experiment",
)
@click.option("-s", "--seed", type=click.INT, default=None, help="Seed of the random starts")
@click.pass_context
@trace("relax_maxwellian")
def relax_maxwellian(
    ctx,
    family: Optional[str],
    state: Optional[str],
    starts: Optional[int],
    seed: Optional[int],
):
    """Compute the Maxwellian M(U): the equilibrium sharing the conserved part of U"""
    options, config = prepare_run(
        ctx,
        "maxwellian",
        {
            "model": {"family": family},
            "maxwellian": {"state": parse_float_list(state), "starts": starts},
        },
        seed,
    )
    model = build_run_model(config)
    settings = config.maxwellian
    U = model.reference_state() if settings.state is None else settings.state
    try:
        U = require_in_state_space(model, U)
    except (StateSpaceViolation, DimensionMismatch) as e:
        raise click.exceptions.UsageError(f"Invalid state: {e.message}")

    result = maxwellian(model, U, tol=settings.tol, max_steps=settings.max_steps, strict=False)
    payload = {
        "model_id": model.model_id,
        "state": U,
        "conserved": to_partitioned(model, U).u,
        "maxwellian": result.to_dict(),
    }
    if result.converged:
        payload["source_at_maxwellian"] = float(np.abs(model.source(result.M)).max())
        payload["entropy"] = {"state": model.entropy(U), "maxwellian": model.entropy(result.M)}
    if settings.starts > 1:
        spread = multi_start_maxwellian(
            model,
            to_partitioned(model, U).u,
            settings.starts,
            np.random.default_rng(config.sample.seed),
            tol=settings.tol,
        )
        payload["multi_start"] = {
            "starts": settings.starts,
            "converged": len(spread.solutions),
            "failures": spread.failures,
            "spread": spread.spread,
        }
    path = RunSession.write_output(MAXWELLIAN_NAME, dump_json(payload))

    try:
        M = result.require(model.model_id)
    except MaxwellianUnavailable as e:
        raise RuntimeFailure(e.message)
    click.echo(f"M(U) = {np.array2string(M, precision=12, separator=', ')}")
    click.echo(
        f"{result.iterations} Newton steps, residual {result.residual:.3e}. "
        f"Written to {path}"
    )
