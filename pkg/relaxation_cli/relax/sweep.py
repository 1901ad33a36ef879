import logging
from typing import Optional

import click
from click import style

from relaxation_cli.relax.exceptions import (
    ChecksFailed,
    DimensionMismatch,
    RelaxError,
    RuntimeFailure,
    StateSpaceViolation,
)
from relaxation_cli.relax.session import RunSession, trace
from relaxation_cli.relax.solver import run_sweep
from relaxation_cli.relax.solver.convergence import HEADLINE, MIN_POINTS
from relaxation_cli.relax.utils import build_run_model, dump_json, prepare_run
from relaxation_cli.util import parse_float_list

LOGGER = logging.getLogger("relaxation-cli")

SWEEP_NAME = "sweep.csv"
FIT_NAME = "sweep_fit.json"


@click.command("sweep")
@click.option("-f", "--family", type=click.STRING, default=None, help="Model family")
@click.option(
    "--eps",
    type=click.STRING,
    default=None,
    help="Comma separated, strictly decreasing relaxation parameters (at least 3)",
)
@click.option("--t-final", type=click.FLOAT, default=None, help="Final time")
@click.option("--cells", type=click.INT, default=None, help="Number of grid cells")
@click.pass_context
@trace("relax_sweep")
def relax_sweep(
    ctx,
    family: Optional[str],
    eps: Optional[str],
    t_final: Optional[float],
    cells: Optional[int],
):
    """Measure how fast the relaxation system approaches its simplified and equilibrium
    versions as eps decreases"""
    options, config = prepare_run(
        ctx,
        "sweep",
        {
            "model": {"family": family},
            "solver": {"t_final": t_final, "cells": cells},
            "sweep": {"eps": parse_float_list(eps)},
        },
    )
    model = build_run_model(config)
    solver = config.solver
    try:
        result = run_sweep(
            model,
            solver.scheme_config(),
            solver.grid(),
            solver.initial,
            config.sweep.eps,
            norm=config.sweep.norm,
            slope_window=config.sweep.slope_window,
            workers=options.workers,
        )
    except (StateSpaceViolation, DimensionMismatch) as e:
        raise click.exceptions.UsageError(f"Invalid solver setup: {e.message}")
    except RelaxError as e:
        raise RuntimeFailure(f"Equilibrium run aborted: {type(e).__name__}: {e.message}")

    RunSession.write_output(SWEEP_NAME, result.to_csv())
    RunSession.write_output(FIT_NAME, dump_json(result.summary()))

    for fit in result.fits():
        slope = "n/a" if fit["slope"] is None else f"{fit['slope']:.4f}"
        verdict = style("ok", fg="green") if fit["in_window"] else style("out", fg="red")
        click.echo(f"{fit['statistic']:<26} slope={slope} ({verdict})")
    if result.successful < MIN_POINTS:
        raise ChecksFailed(
            f"Only {result.successful} of {len(result.rows)} eps-runs succeeded, "
            f"a fit needs {MIN_POINTS}"
        )
    if not result.passed:
        outside = [
            f["statistic"]
            for f in result.fits()
            if f["statistic"] in HEADLINE and not f["in_window"]
        ]
        raise ChecksFailed(
            f"Slope outside {list(config.sweep.slope_window)} for {', '.join(outside)}"
        )
    click.secho(f"✔️  Sweep of {model.model_id} within the slope window")
