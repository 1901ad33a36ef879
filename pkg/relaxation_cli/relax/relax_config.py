import json as jsonlib
from pathlib import Path
from typing import Any, Dict, Optional

import click
import yaml
from click import style
from pydantic import ValidationError

from relaxation_cli.relax.config import RunConfig, generate_yaml, repr_errors, update_config
from relaxation_cli.relax.config.options import BaseModelConfig
from relaxation_cli.relax.config.parser import (
    describe_parse_error,
    load_document,
    load_run_config,
    serialize_config,
)
from relaxation_cli.relax.config.utils import DEFAULT_CONFIG_FILE, config_file_path, merge
from relaxation_cli.relax.exceptions import ParseError
from relaxation_cli.relax.models import ModelRepository
from relaxation_cli.relax.session import trace
from relaxation_cli.relax.utils import relax_options
from relaxation_cli.util import get_content_from_file


def _config_path(ctx: click.Context) -> Path:
    obj = ctx.obj or {}
    return Path(obj["config"]) if obj.get("config") else config_file_path()


def _resolved_run(config_path: Path) -> Optional[RunConfig]:
    if not config_path.is_file():
        return None
    try:
        document = load_document(get_content_from_file(config_path))
    except ParseError as e:
        raise click.exceptions.UsageError(describe_parse_error(e, config_path))
    if "model" not in document:
        return None
    return load_run_config(config_path, document.get("task", "verify"))


def _nested(key: str, value: Any) -> Dict[str, Any]:
    update: Dict[str, Any] = value
    for part in reversed(key.split(".")):
        update = {part: update}
    return update


@click.group("config")
def cli():  # pragma: no-cover
    """Manage relaxation-cli configuration"""
    pass


@cli.command("show")
@click.option("--json", is_flag=True, help="Show configuration as JSON")
@click.pass_context
@trace("relax_config_show")
def show_config(ctx, json: bool = False):
    """Show the ambient options (config file, .env file, environment variables) and the
    resolved run description of the config file."""
    options = relax_options(ctx)
    run = _resolved_run(_config_path(ctx))
    if json:
        rep = jsonlib.dumps(
            {
                "relax": jsonlib.loads(options.json()),
                "run": None if run is None else jsonlib.loads(serialize_config(run)),
            },
            sort_keys=True,
        )
    else:
        rep_relax = "\n".join([f"{k} = {v}" for k, v in options.dict().items()])
        rep_run = (
            "no model configured"
            if run is None
            else serialize_config(run).rstrip("\n")
        )
        rep = (
            f"RELAX OPTIONS\n{'-' * 13}\n{rep_relax}\n\n"
            f"RUN DESCRIPTION\n{'-' * 15}\n{rep_run}"
        )
    click.secho(rep)


@cli.command("generate")
@click.argument("config-file", type=click.Path(), default=DEFAULT_CONFIG_FILE, nargs=1)
@click.option("-f", "--family", type=click.STRING, default="broadwell", help="Model family")
@click.option(
    "--task",
    type=click.Choice(["verify", "maxwellian", "simulate", "sweep"]),
    default="verify",
    help="Task of the run",
)
@trace("relax_config_generate")
def generate_config(config_file: str, family: str, task: str) -> None:
    """Generate a commented starter config file."""
    cfs = style(config_file, fg="yellow")
    if Path(config_file).exists():
        command = style("relax config set", italic=True, fg="green")
        raise click.UsageError(
            f"⚠️  Config file {cfs} already exists. "
            f"Please specify another file or run {command} to update one."
        )
    if family not in ModelRepository.get_instance().list_models():
        raise click.UsageError(f'Unknown model family "{family}"')
    with Path(config_file).open("w", encoding="utf-8") as f:
        f.write(generate_yaml({"family": family, "task": task}))
    click.echo(f"⚡️ Config generated at {cfs}")


@cli.command("set")
@click.argument("key", type=click.STRING)
@click.argument("value", type=click.STRING)
@click.pass_context
@trace("relax_config_set")
def config_set(ctx, key: str, value: str):
    """Set KEY (dotted path, e.g. solver.eps) to VALUE (parsed as YAML) in the config
    file, keeping its comments."""
    config_path = _config_path(ctx)
    if not config_path.is_file():
        raise click.UsageError(
            f"⚠️  Config file {style(str(config_path), fg='yellow')} does not exist. "
            f"Please create one with {style('relax config generate', italic=True, fg='green')}"
        )
    try:
        parsed_value = yaml.safe_load(value)
    except yaml.YAMLError:
        parsed_value = value
    update = _nested(key, parsed_value)
    if not key.startswith(f"{BaseModelConfig.yaml_key}."):
        try:
            document = load_document(get_content_from_file(config_path))
        except ParseError as e:
            raise click.exceptions.UsageError(describe_parse_error(e, config_path))
        document = merge(document, update)
        try:
            if "model" in document:
                RunConfig.parse_obj(document)
        except ValidationError as e:
            raise click.exceptions.UsageError(f"Invalid config: {repr_errors(e)}")
    update_config(config_path, update)
    click.echo(f"🛠️  {key} = {parsed_value}")
