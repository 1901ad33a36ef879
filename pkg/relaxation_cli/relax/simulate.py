import logging
from typing import Optional

import click

from relaxation_cli.relax.exceptions import (
    DimensionMismatch,
    RelaxError,
    RuntimeFailure,
    StateSpaceViolation,
)
from relaxation_cli.relax.session import RunSession, trace
from relaxation_cli.relax.solver import simulate
from relaxation_cli.relax.utils import build_run_model, prepare_run
from relaxation_cli.util import parse_float_list

LOGGER = logging.getLogger("relaxation-cli")

TRAJECTORY_NAME = "trajectory.csv"
ENTROPY_NAME = "entropy.csv"


@click.command("simulate")
@click.option("-f", "--family", type=click.STRING, default=None, help="Model family")
@click.option(
    "--mode",
    type=click.Choice(["full", "simplified", "equilibrium"]),
    default=None,
    help="Relaxation system, frozen-dissipation system or equilibrium system",
)
@click.option("--eps", type=click.FLOAT, default=None, help="Relaxation parameter")
@click.option("--t-final", type=click.FLOAT, default=None, help="Final time")
@click.option("--cells", type=click.INT, default=None, help="Number of grid cells")
@click.option(
    "--freeze-state",
    type=click.STRING,
    default=None,
    help="Comma separated state freezing the dissipation matrix in simplified mode",
)
@click.pass_context
@trace("relax_simulate")
def relax_simulate(
    ctx,
    family: Optional[str],
    mode: Optional[str],
    eps: Optional[float],
    t_final: Optional[float],
    cells: Optional[int],
    freeze_state: Optional[str],
):
    """Run the 1-D finite volume solver on periodic initial data"""
    _, config = prepare_run(
        ctx,
        "simulate",
        {
            "model": {"family": family},
            "solver": {
                "mode": mode,
                "eps": eps,
                "t_final": t_final,
                "cells": cells,
                "freeze_state": parse_float_list(freeze_state),
            },
        },
    )
    model = build_run_model(config)
    solver = config.solver
    try:
        trajectory = simulate(model, solver.scheme_config(), solver.grid(), solver.initial)
    except (StateSpaceViolation, DimensionMismatch) as e:
        raise click.exceptions.UsageError(f"Invalid solver setup: {e.message}")
    except RelaxError as e:
        raise RuntimeFailure(f"Simulation aborted: {type(e).__name__}: {e.message}")

    RunSession.write_output(TRAJECTORY_NAME, trajectory.trajectory_csv())
    RunSession.write_output(ENTROPY_NAME, trajectory.entropy_csv())
    summary = trajectory.summary()
    click.echo(
        f"{summary['model_id']} ({summary['mode']}): t={summary['t_final']} after "
        f"{summary['steps']} steps, total entropy {trajectory.entropy[0]:.12g} -> "
        f"{trajectory.entropy[-1]:.12g}"
    )
    if trajectory.entropy_violations:
        click.secho(
            f"⚠️  Total entropy rose beyond the slack in {trajectory.entropy_violations} steps",
            fg="yellow",
        )
