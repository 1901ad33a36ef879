import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import click
import yaml
from pydantic import ValidationError

from relaxation_cli.relax.exceptions import ParseError
from relaxation_cli.util import get_content_from_file, sha256_digest

from .options import BaseModelConfig, RunConfig
from .utils import merge, omit_none, repr_errors

LOGGER = logging.getLogger("relaxation-cli")


def load_document(text: str) -> Dict[str, Any]:
    """YAML (or JSON) run description as a dict, without the ambient ``relax`` block."""
    try:
        document = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line, column = (mark.line + 1, mark.column + 1) if mark else (None, None)
        raise ParseError(f"{e.problem or e.context}", line=line, column=column)
    except yaml.YAMLError as e:
        raise ParseError(str(e))
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ParseError("Run config must be a mapping", line=1, column=1)
    document.pop(BaseModelConfig.yaml_key, None)
    return document


def parse_config(text: str) -> RunConfig:
    """Resolve a run description; raises ParseError or pydantic's ValidationError."""
    return RunConfig.parse_obj(load_document(text))


def serialize_config(config: RunConfig) -> str:
    # pydantic serializes tuples and nested models first, json.dumps canonicalizes
    return json.dumps(json.loads(config.json()), sort_keys=True, indent=2) + "\n"


def config_digest(config: RunConfig) -> str:
    return sha256_digest(serialize_config(config))


def describe_parse_error(e: ParseError, source: Optional[Path] = None) -> str:
    location = ":".join(str(part) for part in (source, e.line, e.column) if part is not None)
    if not location:
        return f"Invalid config: {e.message}"
    return f"Invalid config at {location}: {e.message}"


def load_run_config(
    config_path: Optional[Path],
    task: str,
    overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Config file values, overridden by the given command options, as a RunConfig.

    Parse and validation problems become click usage errors (exit code 2).
    """
    document: Dict[str, Any] = {}
    if config_path is not None and Path(config_path).is_file():
        try:
            document = load_document(get_content_from_file(config_path))
        except ParseError as e:
            raise click.exceptions.UsageError(describe_parse_error(e, config_path))
    overrides = omit_none(overrides or {})
    family = overrides.get("model", {}).get("family")
    if family and family != (document.get("model") or {}).get("family"):
        # params in the file belong to another family
        document.pop("model", None)
    document = merge(document, overrides)
    document["task"] = task
    try:
        config = RunConfig.parse_obj(document)
    except ValidationError as e:
        raise click.exceptions.UsageError(f"Invalid config: {repr_errors(e)}")
    LOGGER.debug(f"Resolved {task} run for {config.model.family}")
    return config
