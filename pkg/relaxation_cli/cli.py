"""The main runtime of the Relaxation CLI."""
import logging
import os
import sys
from pathlib import Path
from typing import Optional

import click

from relaxation_cli import __version__
from relaxation_cli.relax.config.utils import DEFAULT_CONFIG_FILE
from relaxation_cli.relax.equilibrium import relax_maxwellian
from relaxation_cli.relax.relax_config import cli as relax_config
from relaxation_cli.relax.simulate import relax_simulate
from relaxation_cli.relax.sweep import relax_sweep
from relaxation_cli.relax.verify import relax_verify
from relaxation_cli.relax.version import relax_version

LOGGER = logging.getLogger("relaxation-cli")


# noinspection PyIncorrectDocstring
@click.group()
@click.option(
    "--debug",
    is_flag=True,
    default=False,
    envvar="RELAX_DEBUG",
    help="Provide additional debug output",
)
@click.option(
    "-c",
    "--config",
    type=click.Path(dir_okay=False),
    envvar="RELAX_CONFIG_FILE",
    help="YAML config file with the run description and default parameters",
    default=DEFAULT_CONFIG_FILE,
)
@click.option(
    "-o",
    "--out",
    "out_dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Directory receiving the output files and manifest.json",
)
@click.option("--seed", type=click.INT, default=None, help="Seed for every random draw")
@click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=None,
    help="Worker processes for the independent runs of a sweep",
)
@click.pass_context
def cli(
    ctx,
    debug: bool,
    config: str,
    out_dir: Optional[str],
    seed: Optional[int],
    workers: Optional[int],
) -> None:
    """Verify, solve and simulate hyperbolic balance laws with relaxation sources

    \f

    :param ctx: Click context holding group-level parameters
    :param debug: Boolean to enable the `logging` debug mode
    :param config: YAML config file to read the run description from
    :param out_dir: Output directory of the run
    :param seed: Seed overriding the config file
    :param workers: Worker processes of a sweep
    """

    # set loggers to debug mode
    if debug:
        LOGGER.setLevel(logging.DEBUG)
        LOGGER.addHandler(logging.StreamHandler())

    LOGGER.debug("Initializing configuration context")
    # this env var is used by the `RelaxOptions` class to load the ambient settings later
    os.environ["RELAX_CONFIG_FILE"] = str(Path(config).absolute())
    if Path(config).is_file():
        LOGGER.debug(f"Using config at {config}")

    ctx.obj = {
        "debug": debug,
        "config": str(Path(config).absolute()),
        "out_dir": out_dir,
        "seed": seed,
        "workers": workers,
    }
    LOGGER.debug(f"relaxation-cli {__version__}")


LOGGER.debug("Registering commands")
cli.add_command(relax_verify)
cli.add_command(relax_maxwellian)
cli.add_command(relax_simulate)
cli.add_command(relax_sweep)
cli.add_command(relax_config)
cli.add_command(relax_version)

if __name__ == "__main__":
    sys.exit(cli())  # pragma: no cover
