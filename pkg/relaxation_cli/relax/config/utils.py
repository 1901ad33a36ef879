import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml as pyyaml
from pydantic import ValidationError
from ruamel.yaml import YAML

LOGGER = logging.getLogger("relaxation-cli")

DEFAULT_CONFIG_FILE = ".relax.yml"

yaml = YAML()
yaml.indent(offset=2, sequence=4)


def merge(
    config: Dict[str, Any], update: Dict[str, Any], _key: Optional[str] = None
) -> Dict[str, Any]:
    for key, value in update.items():
        if type(value) == dict:
            config[key] = merge(config.get(key, {}) or {}, value)
            continue
        config[key] = value
    return config


def update_config(config_path: Path, update: Dict[str, Any]):
    with config_path.open("r", encoding="utf-8") as f:
        config = yaml.load(f) or {}
        config = merge(config, update)

    with config_path.open("w", encoding="utf-8") as f:
        yaml.dump(config, f)


def omit_none(d: Dict[str, Any]) -> Dict[str, Any]:
    """Drop None values, recursing into nested dicts (empty ones are dropped too)."""
    result = {}
    for k, v in d.items():
        if isinstance(v, dict):
            v = omit_none(v)
            if not v:
                continue
        if v is not None:
            result[k] = v
    return result


def repr_errors(error: ValidationError) -> str:
    errors = []
    for err in error.errors():
        loc = " -> ".join(str(part) for part in err.get("loc", []))
        if err.get("type") == "value_error.missing":
            errors.append(f"Missing required option: {loc}")
        else:
            errors.append(f"{loc}: {err.get('msg', 'Value Error')}")
    return ", ".join(errors)


def config_file_path() -> Path:
    # set by the -c option of the cli (e.g. relax -c .relax-test.yml verify)
    # or directly as RELAX_CONFIG_FILE=.relax-test.yml
    return Path(os.environ.get("RELAX_CONFIG_FILE", DEFAULT_CONFIG_FILE))


def yaml_config_settings_source(key="relax"):
    def loader(_) -> Dict[str, Any]:
        config_path = config_file_path()
        if config_path.is_file():
            LOGGER.debug(f"Parsing config at {config_path}")
            with open(config_path) as config_f:
                try:
                    parsed_config = pyyaml.safe_load(config_f.read())
                except pyyaml.YAMLError:
                    # reported with its position when the run description is parsed
                    return {}
                if not isinstance(parsed_config, dict):
                    return {}
                return parsed_config.get(key, {}) or {}
        return {}

    return loader
