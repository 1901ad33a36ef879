import logging
from typing import Optional

import click
from click import style

from relaxation_cli.relax.checks import run_full_suite
from relaxation_cli.relax.exceptions import ChecksFailed
from relaxation_cli.relax.models import MUTATIONS, ModelRepository
from relaxation_cli.relax.session import RunSession, trace
from relaxation_cli.relax.utils import build_run_model, prepare_run
from relaxation_cli.util import parse_float_list

LOGGER = logging.getLogger("relaxation-cli")

REPORT_NAME = "report.json"


@click.command("verify")
@click.option(
    "-f",
    "--family",
    type=click.STRING,
    default=None,
    help=f"Model family. Valid values - {', '.join(ModelRepository.get_instance().list_models())}",
)
@click.option(
    "-n",
    "--samples",
    type=click.IntRange(min=1),
    default=None,
    help="Number of sampled states (default 1000)",
)
@click.option("-s", "--seed", type=click.INT, default=None, help="Sampling seed (default 42)")
@click.option(
    "--mutate",
    type=click.Choice(sorted(MUTATIONS)),
    default=None,
    help="Verify a deliberately broken version of the model",
)
@click.option(
    "--freeze-at",
    type=click.STRING,
    default=None,
    help="Verify the simplified system with the dissipation matrix frozen at this "
    "comma separated state",
)
@click.option(
    "--transform-seed",
    type=click.INT,
    default=None,
    help="Seed of the random change of variables (default: the sampling seed)",
)
@click.pass_context
@trace("relax_verify")
def relax_verify(
    ctx,
    family: Optional[str],
    samples: Optional[int],
    seed: Optional[int],
    mutate: Optional[str],
    freeze_at: Optional[str],
    transform_seed: Optional[int],
):
    """Check the structural properties of a model on a random sample of states"""
    _, config = prepare_run(
        ctx,
        "verify",
        {
            "model": {"family": family},
            "sample": {"count": samples},
            "mutate": mutate,
            "freeze_at": parse_float_list(freeze_at),
            "transform_seed": transform_seed,
        },
        seed,
    )
    model = build_run_model(config)
    report = run_full_suite(
        model,
        config.sample.spec(),
        tolerances=config.tolerances,
        near_equilibrium=config.sample.near_equilibrium,
        transform_seed=config.transform_seed,
    )
    path = RunSession.write_output(REPORT_NAME, report.to_json())

    for record in report.checks:
        verdict = style("PASS", fg="green") if record.passed else style("FAIL", fg="red")
        click.echo(
            f"{verdict} {record.name:<30} worst={record.worst_residual:.3e} "
            f"tol={record.tolerance:.1e}"
        )
    failed = [c.name for c in report.checks if not c.passed]
    if failed:
        raise ChecksFailed(
            f"{len(failed)} of {len(report.checks)} checks failed for {model.model_id}: "
            f"{', '.join(failed)}. Report written to {path}"
        )
    click.secho(f"✔️  All checks passed for {model.model_id}. Report written to {path}")
