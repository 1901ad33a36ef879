import hashlib
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import AnyStr, Callable, Iterable, List, Optional, TypeVar, Union

import click

LOGGER = logging.getLogger("relaxation-cli")

T = TypeVar("T")
R = TypeVar("R")


def get_content_from_file(file_path: Path) -> AnyStr:
    if not Path(file_path).is_file():
        raise click.exceptions.UsageError(
            f"Could not find {file_path}. Did you pass the correct path?"
        )
    with open(file_path) as reader:
        return reader.read()


def sha256_digest(content: Union[str, bytes]) -> str:
    if isinstance(content, str):
        content = content.encode("utf-8")
    return hashlib.sha256(content).hexdigest()


def write_atomic(path: Path, content: str) -> str:
    """Write ``content`` next to ``path`` and move it into place with ``os.replace``.

    Returns the sha256 digest of the written bytes.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = content.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    LOGGER.debug(f"Wrote {path} ({len(data)} bytes)")
    return sha256_digest(data)


def map_ordered(
    func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = 1
) -> List[R]:
    """``list(map(func, items))``, optionally on a pool of worker processes; results keep
    input order. With more than one worker ``func``, the items and the results must pickle."""
    items = list(items)
    if not workers or workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


def parse_float_list(value: Optional[str]) -> Optional[List[float]]:
    """"1, 2.5,3" -> [1.0, 2.5, 3.0]."""
    if value is None:
        return None
    try:
        return [float(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise click.exceptions.BadParameter(f'"{value}" is not a comma separated list of numbers')
