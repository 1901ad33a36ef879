"""Convergence of the relaxation system to its simplified and equilibrium versions as eps -> 0."""
import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from relaxation_cli.relax.core import ModelSystem
from relaxation_cli.relax.exceptions import RelaxError
from relaxation_cli.relax.types import SweepFitDict
from relaxation_cli.util import map_ordered

from .grid import Grid1D, InitialCondition
from .scheme import SolverConfig
from .trajectory import Trajectory, compare_trajectories, simulate

LOGGER = logging.getLogger("relaxation-cli")

# headline statistics (norm at t_final) followed by their max-over-time variants
STATISTICS = (
    "full_vs_simplified",
    "full_vs_equilibrium",
    "max_full_vs_simplified",
    "max_full_vs_equilibrium",
)
HEADLINE = STATISTICS[:2]
MIN_POINTS = 3


@dataclass
class SweepRow:
    eps: float
    norms: Dict[str, Optional[float]] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def successful(self) -> bool:
        return self.error is None


@dataclass
class LogLogFit:
    slope: Optional[float]
    intercept: Optional[float]
    residual: Optional[float]
    points: int


def fit_loglog(eps: Sequence[float], norms: Sequence[Optional[float]]) -> LogLogFit:
    """Least squares line through (log eps, log norm); non-positive or missing norms are
    left out and fewer than three points give no fit."""
    pairs = [
        (math.log(e), math.log(v))
        for e, v in zip(eps, norms)
        if v is not None and math.isfinite(v) and v > 0
    ]
    if len(pairs) < MIN_POINTS:
        return LogLogFit(slope=None, intercept=None, residual=None, points=len(pairs))
    x, y = np.array(pairs).T
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return LogLogFit(
        slope=float(slope), intercept=float(intercept), residual=residual, points=len(pairs)
    )


def is_monotone(norms: Sequence[Optional[float]]) -> bool:
    """Norms strictly decrease along the (decreasing) eps list, failures skipped."""
    values = [v for v in norms if v is not None]
    return len(values) >= 2 and all(b < a for a, b in zip(values, values[1:]))


@dataclass
class SweepResult:
    model_id: str
    eps: List[float]
    norm: str
    slope_window: Tuple[float, float]
    rows: List[SweepRow]

    @property
    def successful(self) -> int:
        return sum(row.successful for row in self.rows)

    def series(self, statistic: str) -> List[Optional[float]]:
        return [row.norms.get(statistic) for row in self.rows]

    def fit(self, statistic: str) -> SweepFitDict:
        fit = fit_loglog(self.eps, self.series(statistic))
        lower, upper = self.slope_window
        return {
            "statistic": statistic,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "residual": fit.residual,
            "in_window": fit.slope is not None and lower <= fit.slope <= upper,
            "monotone": is_monotone(self.series(statistic)),
            "successful": fit.points,
        }

    def fits(self) -> List[SweepFitDict]:
        return [self.fit(statistic) for statistic in STATISTICS]

    @property
    def passed(self) -> bool:
        return self.successful >= MIN_POINTS and all(
            self.fit(statistic)["in_window"] for statistic in HEADLINE
        )

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["eps", "norm_full_vs_simplified", "norm_full_vs_equilibrium"])
        for row in self.rows:
            writer.writerow(
                [repr(float(row.eps))]
                + [
                    "nan" if row.norms.get(s) is None else repr(float(row.norms[s]))
                    for s in HEADLINE
                ]
            )
        return buffer.getvalue()

    def summary(self) -> Dict:
        return {
            "model_id": self.model_id,
            "eps": list(self.eps),
            "norm": self.norm,
            "slope_window": list(self.slope_window),
            "successful": self.successful,
            "passed": self.passed,
            "fits": self.fits(),
            "max_over_time": {
                s: self.series(s) for s in STATISTICS if s not in HEADLINE
            },
            "failures": [
                {"eps": row.eps, "error": row.error} for row in self.rows if not row.successful
            ],
        }


def simulate_pair(
    model: ModelSystem, config: SolverConfig, grid: Grid1D, ic: InitialCondition, eps: float
) -> Tuple[Trajectory, Trajectory]:
    """Full and simplified runs at one eps."""
    full = simulate(model, config.copy(update={"mode": "full", "eps": eps}), grid, ic)
    simplified = simulate(model, config.copy(update={"mode": "simplified", "eps": eps}), grid, ic)
    return full, simplified


def _sweep_point(
    job: Tuple[ModelSystem, SolverConfig, Grid1D, InitialCondition, float]
) -> Union[Tuple[Trajectory, Trajectory], str]:
    # module level so that worker processes can unpickle it; failures come back as text
    model, config, grid, ic, eps = job
    LOGGER.debug(f"Sweeping {model.model_id} at eps={eps}")
    try:
        return simulate_pair(model, config, grid, ic, eps)
    except RelaxError as err:
        LOGGER.warning(f"Run at eps={eps} failed: {type(err).__name__}: {err.message}")
        return f"{type(err).__name__}: {err.message}"


def run_sweep(
    model: ModelSystem,
    config: SolverConfig,
    grid: Grid1D,
    ic: InitialCondition,
    eps: Sequence[float],
    norm: str = "sup",
    slope_window: Tuple[float, float] = (0.8, 1.2),
    workers: int = 1,
) -> SweepResult:
    """Full and simplified runs for every eps against one equilibrium-mode run.

    A failed eps-run is recorded in its row; a failed equilibrium run aborts the sweep.
    """
    reference = simulate(model, config.copy(update={"mode": "equilibrium"}), grid, ic)
    rows_of_P = model.conserved_rows

    def compare(full: Trajectory, simplified: Trajectory) -> Dict[str, float]:
        return {
            "full_vs_simplified": compare_trajectories(full, simplified, norm),
            "full_vs_equilibrium": compare_trajectories(
                full, reference, norm, projection=rows_of_P
            ),
            "max_full_vs_simplified": compare_trajectories(
                full, simplified, norm, over_time=True
            ),
            "max_full_vs_equilibrium": compare_trajectories(
                full, reference, norm, over_time=True, projection=rows_of_P
            ),
        }

    outcomes = map_ordered(_sweep_point, [(model, config, grid, ic, e) for e in eps], workers)
    rows = [
        SweepRow(eps=e, error=outcome)
        if isinstance(outcome, str)
        else SweepRow(eps=e, norms=compare(*outcome))
        for e, outcome in zip(eps, outcomes)
    ]
    result = SweepResult(
        model_id=model.model_id,
        eps=list(eps),
        norm=norm,
        slope_window=tuple(slope_window),
        rows=rows,
    )
    LOGGER.debug(f"Sweep of {model.model_id}: {result.successful}/{len(rows)} runs succeeded")
    return result
