from typing import List, Optional

from typing_extensions import TypedDict


class OutputFile(TypedDict):
    path: str
    sha256: str


class RunManifestDict(TypedDict):
    tool_version: str
    command: str
    config_digest: Optional[str]
    seed: Optional[int]
    started_at: str
    finished_at: str
    outputs: List[OutputFile]


class SweepFitDict(TypedDict):
    statistic: str
    slope: Optional[float]
    intercept: Optional[float]
    residual: Optional[float]
    in_window: bool
    monotone: bool
    successful: int
