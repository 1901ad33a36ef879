import functools
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Optional

from click import ClickException

from relaxation_cli import __version__
from relaxation_cli.relax.exceptions import RuntimeFailure
from relaxation_cli.relax.types import RunManifestDict
from relaxation_cli.util import write_atomic

LOGGER = logging.getLogger("relaxation-cli")

MANIFEST_NAME = "manifest.json"


def timestamp() -> str:
    """ISO-8601 UTC; SOURCE_DATE_EPOCH pins it for reproducible manifests."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = (
        datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        if epoch
        else datetime.now(tz=timezone.utc)
    )
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


class RunSession:
    """Per-process record of one command run: outputs with digests, seed, config digest."""

    out_dir: Optional[Path] = None
    command: str = ""
    config_digest: Optional[str] = None
    seed: Optional[int] = None
    started_at: Optional[str] = None
    outputs: Dict[str, str] = {}

    @classmethod
    def start_session(
        cls, out_dir: Path, config_digest: Optional[str] = None, seed: Optional[int] = None
    ):
        cls.out_dir = Path(out_dir)
        cls.command = " ".join(sys.argv)
        cls.config_digest = config_digest
        cls.seed = seed
        cls.started_at = timestamp()
        cls.outputs = {}
        LOGGER.debug(f"Session started, outputs go to {cls.out_dir}")

    @classmethod
    def active(cls) -> bool:
        return cls.out_dir is not None

    @classmethod
    def write_output(cls, name: str, content: str) -> Path:
        if not cls.active():
            raise RuntimeFailure("No run session to write outputs into")
        path = cls.out_dir.joinpath(name)
        try:
            cls.outputs[name] = write_atomic(path, content)
        except OSError as e:
            raise RuntimeFailure(f"Could not write {path}: {e}")
        return path

    @classmethod
    def manifest(cls) -> RunManifestDict:
        return {
            "tool_version": __version__,
            "command": cls.command,
            "config_digest": cls.config_digest,
            "seed": cls.seed,
            "started_at": cls.started_at,
            "finished_at": timestamp(),
            "outputs": [{"path": k, "sha256": v} for k, v in sorted(cls.outputs.items())],
        }

    @classmethod
    def end_session(cls) -> Optional[Path]:
        """Write the manifest next to the outputs (only if there are any) and reset."""
        if not cls.active():
            return None
        path = None
        if cls.outputs:
            path = cls.out_dir.joinpath(MANIFEST_NAME)
            content = json.dumps(cls.manifest(), sort_keys=True, indent=2) + "\n"
            try:
                write_atomic(path, content)
            except OSError as e:
                raise RuntimeFailure(f"Could not write {path}: {e}")
        cls.out_dir = None
        cls.outputs = {}
        return path


def trace(name: str):
    """Time a command; anything but a ClickException becomes a RuntimeFailure (exit 3)."""

    def trace_factory(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            _start_time = time.perf_counter()
            try:
                return func(*args, **kwargs)
            except ClickException:
                # do not wrap the click exceptions
                raise
            except Exception as e:
                LOGGER.debug(f"{name} failed", exc_info=True)
                raise RuntimeFailure(f"Unhandled exception - {type(e).__name__}: {e}")
            finally:
                LOGGER.debug(f"{name} finished in {time.perf_counter() - _start_time:.3f}s")
                RunSession.end_session()

        return wrapper

    return trace_factory
