from .convergence import SweepResult, SweepRow, fit_loglog, is_monotone, run_sweep
from .grid import Grid1D, InitialCondition, initial_state
from .scheme import ImexScheme, SolverConfig, numerical_flux, step_imex
from .trajectory import (
    ENTROPY_SLACK,
    Trajectory,
    compare_trajectories,
    entropy_increased,
    simulate,
    total_entropy,
)
