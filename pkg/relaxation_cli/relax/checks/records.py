import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, validator

from relaxation_cli.relax.types import CheckRecordDict


class Tolerances(BaseModel):
    analytic: float = 1e-10
    fd: float = 1e-5
    angle: float = 1e-8
    pd: float = 0.0
    max_condition: float = 1e8
    transform_condition: float = 1e3
    min_bound_ratio: float = 1e-3

    class Config:
        extra = "forbid"

    @validator("analytic", "fd", "angle", "max_condition", "min_bound_ratio")
    def positive(cls, v, field):
        if v <= 0:
            raise ValueError(f"{field.name} must be positive")
        return v

    @validator("transform_condition")
    def at_least_one(cls, v):
        if v < 1:
            raise ValueError("transform_condition must be at least 1")
        return v

    def scaled(self, factor: float) -> "Tolerances":
        """Tolerances for a model transformed by a matrix of condition number ``factor``."""
        return self.copy(
            update={
                "analytic": self.analytic * factor,
                "fd": self.fd * factor,
                "angle": self.angle * factor,
                "min_bound_ratio": self.min_bound_ratio / factor,
            }
        )


def jsonable(value: Any) -> Any:
    """Plain Python values for json; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


@dataclass
class CheckRecord:
    name: str
    passed: bool
    worst_residual: float
    worst_state: Optional[List[float]]
    tolerance: float
    details: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    def to_dict(self) -> CheckRecordDict:
        return jsonable(
            {
                "name": self.name,
                "passed": self.passed,
                "worst_residual": self.worst_residual,
                "worst_state": self.worst_state,
                "tolerance": self.tolerance,
                "details": self.details,
                "error": self.error,
            }
        )


class Worst:
    """Largest residual seen so far and the state it occurred at."""

    def __init__(self):
        self.residual = 0.0
        self.state: Optional[np.ndarray] = None

    def update(self, residual: float, U: np.ndarray) -> None:
        residual = float(residual)
        if self.state is None or residual > self.residual or not math.isfinite(residual):
            if self.state is not None and not math.isfinite(self.residual):
                return
            self.residual = residual
            self.state = np.array(U, dtype=float)

    def record(
        self, name: str, passed: bool, tolerance: float, **details: Any
    ) -> CheckRecord:
        return CheckRecord(
            name=name,
            passed=bool(passed),
            worst_residual=self.residual,
            worst_state=None if self.state is None else self.state.tolist(),
            tolerance=tolerance,
            details=details,
        )
