import time

import numpy as np
import pytest
from pydantic import ValidationError

from relaxation_cli.relax.checks import draw_sample
from relaxation_cli.relax.core import to_partitioned
from relaxation_cli.relax.exceptions import GridMismatch, StateSpaceViolation
from relaxation_cli.relax.maxwellian import maxwellian
from relaxation_cli.relax.models import build_model
from relaxation_cli.relax.solver import (
    Grid1D,
    ImexScheme,
    InitialCondition,
    SolverConfig,
    SweepResult,
    SweepRow,
    compare_trajectories,
    fit_loglog,
    initial_state,
    is_monotone,
    numerical_flux,
    run_sweep,
    simulate,
    step_imex,
)
from relaxation_cli.relax.solver.convergence import HEADLINE, STATISTICS

from tests.common import small_sample


def small_run(model, mode="full", eps=0.01, cells=16, t_final=0.1, snapshots=2, **kwargs):
    config = SolverConfig(mode=mode, eps=eps, t_final=t_final, snapshots=snapshots)
    return simulate(model, config, Grid1D(cells=cells), **kwargs)


def test_grid():
    grid = Grid1D(cells=4, x_min=0.0, x_max=2.0)
    assert grid.dx == 0.5
    assert grid.centers.tolist() == [0.25, 0.75, 1.25, 1.75]


@pytest.mark.parametrize(
    "params", [{"cells": 2}, {"x_min": 1.0, "x_max": 1.0}, {"cells": 10, "extra": 1}]
)
def test_invalid_grid(params):
    with pytest.raises(ValidationError):
        Grid1D(**params)


@pytest.mark.parametrize(
    "params", [{"eps": 0.0}, {"cfl": 1.0}, {"snapshots": 0}, {"mode": "implicit"}]
)
def test_invalid_solver_config(params):
    with pytest.raises(ValidationError):
        SolverConfig(**params)


@pytest.mark.parametrize("family", ["broadwell", "euler_damping", "viscoelastic"])
def test_numerical_flux_is_consistent(family):
    model = build_model(family)
    for U in draw_sample(model, small_sample(count=10)):
        assert np.array_equal(numerical_flux(model, U, U), model.flux(U, 0))


def test_broadwell_numerical_flux_is_upwind(broadwell):
    U_L = np.array([2.0, 1.0, 0.5])
    U_R = np.array([1.0, 3.0, 1.5])
    flux = numerical_flux(broadwell, U_L, U_R)
    assert flux[0] == pytest.approx(U_L[0])
    assert flux[1] == pytest.approx(-0.5 * (U_R[1] - U_L[1]))
    assert flux[2] == pytest.approx(-U_R[2])


@pytest.mark.parametrize("family", ["broadwell", "euler_damping", "viscoelastic"])
def test_interface_fluxes_pair_each_cell_with_its_right_neighbour(family):
    model = build_model(family)
    grid = Grid1D(cells=12)
    U = initial_state(model, grid, InitialCondition(profile="sine", equilibrium=False))
    fluxes = ImexScheme(model, grid, SolverConfig()).interface_fluxes(U)
    assert fluxes.shape == U.shape
    for i in range(grid.cells):
        expected = numerical_flux(model, U[i], U[(i + 1) % grid.cells])
        assert fluxes[i] == pytest.approx(expected, rel=1e-14, abs=1e-14)


def test_gaussian_initial_data_is_in_equilibrium(euler_damping):
    U = initial_state(euler_damping, Grid1D(cells=20), InitialCondition())
    assert U.shape == (20, 2)
    assert np.abs(U[:, 1]).max() <= 1e-12
    # bump of 0.2 centred at x = 0.5
    assert U[:, 0].max() == pytest.approx(1.2, abs=0.01)
    assert U[:, 0].min() >= 1.0


def test_initial_direction_must_match_conserved_part(broadwell):
    with pytest.raises(StateSpaceViolation):
        initial_state(broadwell, Grid1D(cells=8), InitialCondition(direction=[1.0]))


@pytest.mark.parametrize("mode", ["full", "simplified", "equilibrium"])
def test_uniform_data_is_stationary(broadwell, mode):
    trajectory = small_run(
        broadwell, mode=mode, cells=8, t_final=0.05, ic=InitialCondition(profile="uniform")
    )
    for U in trajectory.states[1:]:
        assert np.array_equal(U, trajectory.states[0])


def test_large_eps_is_pure_transport(broadwell):
    grid = Grid1D(cells=16)
    scheme = ImexScheme(broadwell, grid, SolverConfig(eps=1e12))
    U = initial_state(broadwell, grid, InitialCondition(equilibrium=False))
    dt = scheme.time_step(U)
    assert np.array_equal(scheme.step(U, dt, 0.0), scheme.transport(U, dt, 0.0))


def test_step_imex_matches_scheme(euler_damping):
    grid = Grid1D(cells=8)
    config = SolverConfig(eps=0.05)
    U = initial_state(euler_damping, grid, InitialCondition(profile="sine"))
    scheme = ImexScheme(euler_damping, grid, config)
    dt = scheme.time_step(U)
    assert np.array_equal(step_imex(euler_damping, config, grid, U, dt), scheme.step(U, dt, 0.0))


def test_implicit_solve(broadwell):
    scheme = ImexScheme(broadwell, Grid1D(cells=8), SolverConfig(eps=1e-3))
    U_tr = np.array([2.0, 1.0, 1.5])
    U, iterations = scheme.relax(U_tr[None], 0.01, 0.0)
    U = U[0]
    assert 0 < iterations <= 20
    assert broadwell.in_state_space(U)
    before, after = to_partitioned(broadwell, U_tr), to_partitioned(broadwell, U)
    assert np.allclose(after.u, before.u, rtol=0, atol=1e-12)


def test_implicit_solve_of_damped_momentum(euler_damping):
    # v = v* - c v  gives  v = v* / (1 + c)
    scheme = ImexScheme(euler_damping, Grid1D(cells=8), SolverConfig(eps=0.1))
    U, _ = scheme.relax(np.array([[1.0, 0.6], [2.0, -0.4], [0.8, 0.0]]), 0.1, 0.0)
    assert U[:, 0] == pytest.approx([1.0, 2.0, 0.8], abs=1e-15)
    assert U[:, 1] == pytest.approx([0.3, -0.2, 0.0], abs=1e-12)


def test_conservation(broadwell):
    trajectory = small_run(broadwell, t_final=0.2, snapshots=4)
    totals = trajectory.conserved_totals(broadwell)
    assert totals.shape == (5, 2)
    assert np.abs(totals - totals[0]).max() <= 1e-12 * (1.0 + np.abs(totals[0]).max())


@pytest.mark.parametrize("mode", ["full", "simplified", "equilibrium"])
def test_entropy_does_not_increase(broadwell, mode):
    trajectory = small_run(broadwell, mode=mode, cells=32, t_final=0.2)
    assert trajectory.entropy_violations == 0
    history = [value for _, value in trajectory.entropy_history]
    assert history[-1] <= history[0]


def test_equilibrium_mode_keeps_euler_at_rest(euler_damping):
    trajectory = small_run(euler_damping, mode="equilibrium", cells=20)
    for U in trajectory.states:
        assert np.abs(U[:, 1]).max() <= 1e-12


@pytest.mark.parametrize("family", ["broadwell", "vibrational_gas"])
def test_equilibrium_mode_stays_on_the_maxwellians(family):
    model = build_model(family)
    trajectory = small_run(model, mode="equilibrium", cells=24, t_final=0.2, snapshots=4)
    for U in trajectory.states:
        for state in U:
            assert maxwellian(model, state).M == pytest.approx(state, abs=1e-10)
    totals = trajectory.conserved_totals(model)
    assert np.abs(totals - totals[0]).max() <= 1e-12 * (1.0 + np.abs(totals[0]).max())


def test_snapshot_times(euler_damping):
    trajectory = small_run(euler_damping, t_final=0.1, snapshots=4)
    assert trajectory.times == pytest.approx([0.0, 0.025, 0.05, 0.075, 0.1], abs=1e-15)
    assert trajectory.times[-1] == 0.1
    summary = trajectory.summary()
    assert summary["snapshots"] == 5
    assert summary["mode"] == "full"
    assert summary["steps"] == trajectory.steps > 0


def test_simulation_is_deterministic(broadwell):
    first = small_run(broadwell)
    second = small_run(broadwell)
    assert np.array_equal(first.final_state, second.final_state)
    assert first.trajectory_csv() == second.trajectory_csv()


def test_trajectory_csv(broadwell):
    trajectory = small_run(broadwell, cells=8, snapshots=2)
    lines = trajectory.trajectory_csv().splitlines()
    assert lines[0] == "t,x,comp_0,comp_1,comp_2"
    assert len(lines) == 3 * 8 + 1
    entropy_lines = trajectory.entropy_csv().splitlines()
    assert entropy_lines[0] == "t,total_entropy"
    assert len(entropy_lines) == 4


def test_compare_trajectories(broadwell):
    full = small_run(broadwell)
    assert compare_trajectories(full, full) == 0.0
    assert compare_trajectories(full, full, norm="L1", over_time=True) == 0.0
    simplified = small_run(broadwell, mode="simplified")
    assert compare_trajectories(full, simplified) > 0.0
    with pytest.raises(ValueError):
        compare_trajectories(full, simplified, norm="L2")


def test_compare_trajectories_on_different_grids(broadwell):
    with pytest.raises(GridMismatch):
        compare_trajectories(small_run(broadwell, cells=8), small_run(broadwell, cells=12))
    with pytest.raises(GridMismatch):
        compare_trajectories(small_run(broadwell, snapshots=2), small_run(broadwell, snapshots=3))


def test_fit_loglog():
    eps = [1e-1, 1e-2, 1e-3]
    fit = fit_loglog(eps, [2.0 * e for e in eps])
    assert fit.slope == pytest.approx(1.0)
    assert fit.intercept == pytest.approx(np.log(2.0))
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.points == 3


def test_fit_loglog_needs_three_points():
    fit = fit_loglog([1e-1, 1e-2, 1e-3], [0.2, None, 0.0])
    assert fit.slope is None
    assert fit.points == 1


@pytest.mark.parametrize(
    "norms,expected",
    [([3.0, 2.0, 1.0], True), ([3.0, 3.0], False), ([None, 2.0, 1.0], True), ([1.0], False)],
)
def test_is_monotone(norms, expected):
    assert is_monotone(norms) is expected


def test_sweep_csv_marks_failed_runs():
    norms = {s: 0.5 for s in STATISTICS}
    result = SweepResult(
        model_id="broadwell",
        eps=[0.1, 0.01, 0.001],
        norm="sup",
        slope_window=(0.8, 1.2),
        rows=[
            SweepRow(eps=0.1, norms=norms),
            SweepRow(eps=0.01, error="NewtonFailure: cell 3"),
            SweepRow(eps=0.001, norms=norms),
        ],
    )
    assert result.to_csv().splitlines() == [
        "eps,norm_full_vs_simplified,norm_full_vs_equilibrium",
        "0.1,0.5,0.5",
        "0.01,nan,nan",
        "0.001,0.5,0.5",
    ]
    assert result.successful == 2
    assert not result.passed
    assert result.summary()["failures"] == [{"eps": 0.01, "error": "NewtonFailure: cell 3"}]


def test_small_sweep(euler_damping):
    result = run_sweep(
        euler_damping,
        SolverConfig(t_final=0.05, snapshots=1),
        Grid1D(cells=16),
        InitialCondition(),
        [0.1, 0.05, 0.025],
    )
    assert result.successful == 3
    assert len(result.to_csv().splitlines()) == 4
    for statistic in HEADLINE:
        assert all(v >= 0.0 for v in result.series(statistic))
    assert [f["statistic"] for f in result.fits()] == list(STATISTICS)


@pytest.mark.slow
@pytest.mark.parametrize("family", ["broadwell", "euler_damping"])
def test_sweep_slope_is_first_order(family):
    result = run_sweep(
        build_model(family),
        SolverConfig(t_final=0.5),
        Grid1D(cells=400),
        InitialCondition(),
        [0.1, 0.05, 0.025, 0.0125],
        workers=4,
    )
    assert result.successful == 4
    for statistic in HEADLINE:
        assert result.fit(statistic)["in_window"], result.fit(statistic)
    assert result.passed


def test_sweep_does_not_depend_on_workers(broadwell):
    args = (broadwell, SolverConfig(t_final=0.05, snapshots=2), Grid1D(cells=16), InitialCondition())
    serial = run_sweep(*args, [0.1, 0.05, 0.025])
    parallel = run_sweep(*args, [0.1, 0.05, 0.025], workers=2)
    assert serial.to_csv() == parallel.to_csv()
    assert serial.summary() == parallel.summary()


def test_reduced_sweep_is_fast(broadwell):
    start = time.perf_counter()
    result = run_sweep(
        broadwell, SolverConfig(t_final=0.1), Grid1D(cells=50), InitialCondition(), [0.1, 0.05, 0.025]
    )
    elapsed = time.perf_counter() - start
    assert result.successful == 3
    # seven runs of 50 cells; the full sweep is 4 eps on 400 cells to t = 0.5
    assert elapsed < 30.0, f"reduced sweep took {elapsed:.1f}s"


@pytest.mark.parametrize("family", ["broadwell", "euler_damping"])
def test_coarse_sweep_slope(family):
    result = run_sweep(
        build_model(family),
        SolverConfig(t_final=0.2),
        Grid1D(cells=50),
        InitialCondition(),
        [0.2, 0.1, 0.05, 0.025],
        slope_window=(0.5, 1.5),
    )
    assert result.successful == 4
    for statistic in HEADLINE:
        fit = result.fit(statistic)
        assert fit["in_window"], fit
        assert fit["monotone"], result.series(statistic)
