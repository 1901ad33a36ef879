from typing import Any, Dict, List, Optional

from typing_extensions import TypedDict


class CheckRecordDict(TypedDict):
    name: str
    passed: bool
    worst_residual: float
    worst_state: Optional[List[float]]
    tolerance: float
    details: Dict[str, Any]
    error: Optional[str]


class SampleEcho(TypedDict):
    count: int
    seed: int
    box: Optional[List[List[float]]]


class VerificationReportDict(TypedDict):
    model_id: str
    sample: SampleEcho
    tolerances: Dict[str, float]
    checks: List[CheckRecordDict]
    passed: bool
