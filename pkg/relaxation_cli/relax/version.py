import click

from relaxation_cli import __version__


@click.command("version")
def relax_version():  # pragma: no cover
    """Show relaxation-cli version"""
    click.secho(f"v{__version__}")
