import json
from pathlib import Path
from typing import Any, Dict, List, Union

import yaml
from deepdiff import DeepDiff

from relaxation_cli.relax.checks import SampleSpec


def write_config(config_path: Union[str, Path], **document: Any) -> Path:
    config_path = Path(config_path)
    with config_path.open("w") as f:
        yaml.safe_dump(document, f)
    return config_path


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path) as f:
        return json.load(f)


def read_lines(path: Union[str, Path]) -> List[str]:
    with open(path) as f:
        return f.read().splitlines()


def small_sample(count: int = 40, seed: int = 42) -> SampleSpec:
    return SampleSpec(count=count, seed=seed)


def assert_is_equal(
    a: Union[List[any], Dict[str, any]], b: Union[List[any], Dict[str, any]]
):
    res = DeepDiff(a, b, ignore_order=True, report_repetition=True)
    assert res == {}, f"{res}"
