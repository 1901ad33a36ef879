import numpy as np
import pytest
from pytest_lazyfixture import lazy_fixture

from relaxation_cli.relax.checks import SampleSpec, draw_sample
from relaxation_cli.relax.core import to_partitioned
from relaxation_cli.relax.exceptions import (
    MaxwellianUnavailable,
    NoConvergence,
    StateSpaceExit,
    StateSpaceViolation,
)
from relaxation_cli.relax.maxwellian import (
    maxwellian,
    multi_start_maxwellian,
    solve_equilibrium_cells,
    solve_equilibrium_v,
)
from relaxation_cli.relax.models import CATALOG, build_model

from tests.common import small_sample


def test_broadwell_equilibrium_is_fixed(broadwell):
    U = np.array([4.0, 2.0, 1.0])
    result = maxwellian(broadwell, U)
    assert result.converged
    assert np.allclose(result.M, U, rtol=0, atol=1e-12)


def test_euler_damping_maxwellian_is_at_rest(euler_damping):
    result = maxwellian(euler_damping, [1.0, 2.0])
    assert result.converged
    assert np.allclose(result.M, [1.0, 0.0], atol=1e-12)


def test_viscoelastic_maxwellian(viscoelastic):
    # h^-1(-w) = nu = 1 gives w = 1/2, i.e. p = -g(1)
    M = maxwellian(viscoelastic, [1.0, 0.0, 1.0]).M
    assert M == pytest.approx([1.0, 0.0, 0.5], abs=1e-12)
    assert viscoelastic.pressure(M) == pytest.approx(-0.5, abs=1e-12)


def test_solve_equilibrium_v(euler_damping):
    v = solve_equilibrium_v(euler_damping, np.array([1.3]), np.array([0.7]))
    assert v == pytest.approx([0.0], abs=1e-12)


@pytest.mark.parametrize(
    "model",
    [
        lazy_fixture("broadwell"),
        lazy_fixture("euler_damping"),
        lazy_fixture("viscoelastic"),
        lazy_fixture("vibrational_gas"),
    ],
)
def test_maxwellian_is_idempotent_and_conservative(model):
    for U in draw_sample(model, small_sample(count=20)):
        M = maxwellian(model, U).M
        assert np.allclose(maxwellian(model, M).M, M, rtol=1e-10, atol=1e-10)
        u = to_partitioned(model, U).u
        assert np.abs(to_partitioned(model, M).u - u).max() <= 1e-12 * (1.0 + np.abs(u).max())


def test_objective_does_not_increase(broadwell):
    for U in draw_sample(broadwell, small_sample(count=20)):
        trace = maxwellian(broadwell, U).objective
        for before, after in zip(trace, trace[1:]):
            assert after <= before + 1e-12 * (1.0 + abs(before))


@pytest.mark.parametrize("family", CATALOG)
def test_source_vanishes_at_maxwellian(family):
    model = build_model(family)
    converged = 0
    for U in draw_sample(model, SampleSpec(count=20, seed=9)):
        result = maxwellian(model, U, strict=False)
        if not result.converged:
            continue
        converged += 1
        assert np.abs(model.source(result.M)).max() <= 1e-8 * (1.0 + np.abs(U).max())
    assert converged > 0


def test_multi_start_spread(broadwell, rng):
    u = to_partitioned(broadwell, [2.0, 1.0, 0.5]).u
    result = multi_start_maxwellian(broadwell, u, 5, rng)
    assert result.failures == 0
    assert len(result.solutions) == 5
    assert result.spread <= 1e-10


def test_maxwellian_outside_state_space(broadwell):
    with pytest.raises(StateSpaceViolation):
        maxwellian(broadwell, [1.0, -1.0, 1.0])


def test_step_limit(broadwell):
    U = [2.0, 1.0, 1.5]
    with pytest.raises(NoConvergence):
        maxwellian(broadwell, U, max_steps=0)
    result = maxwellian(broadwell, U, max_steps=0, strict=False)
    assert not result.converged
    assert result.M is None
    assert result.error.startswith("NoConvergence")
    assert result.to_dict()["converged"] is False


def test_require(broadwell):
    U = [2.0, 1.0, 1.5]
    M = maxwellian(broadwell, U).require("broadwell")
    assert broadwell.in_state_space(M)
    with pytest.raises(MaxwellianUnavailable) as e:
        maxwellian(broadwell, U, max_steps=0, strict=False).require("broadwell")
    assert "broadwell" in e.value.message
    assert "NoConvergence" in e.value.message


@pytest.mark.parametrize("family", CATALOG)
def test_multi_start_is_unique_over_the_catalog(family):
    model = build_model(family)
    split = model.n - model.r
    for index, U in enumerate(draw_sample(model, SampleSpec(count=3, seed=5))):
        u = to_partitioned(model, U).u
        result = multi_start_maxwellian(model, u, 6, np.random.default_rng(index))
        assert result.solutions, f"no start converged for u={u}"
        reference = maxwellian(model, U, strict=False)
        if reference.converged:
            v = (model.transform @ reference.M)[split:]
            scale = 1.0 + np.abs(v).max(initial=0.0)
            assert result.spread <= 1e-10 * scale
            for solution in result.solutions:
                assert np.abs(solution - v).max(initial=0.0) <= 1e-10 * scale


@pytest.mark.parametrize("family", ["broadwell", "euler_damping", "vibrational_gas"])
def test_solve_equilibrium_cells_matches_single_solves(family):
    model = build_model(family)
    split = model.n - model.r
    states = draw_sample(model, small_sample(count=12))
    W = states @ model.transform.T
    v, U, steps = solve_equilibrium_cells(model, W[:, :split], W[:, split:])
    assert steps > 0
    for row, state in enumerate(states):
        expected = solve_equilibrium_v(model, W[row, :split], W[row, split:])
        assert v[row] == pytest.approx(expected, abs=1e-10)
        assert U[row] == pytest.approx(maxwellian(model, state).M, abs=1e-10)


def test_solve_equilibrium_cells_keeps_converged_rows(broadwell):
    W = np.array([[4.0, 2.0, 1.0], [2.0, 1.0, 1.5]]) @ broadwell.transform.T
    v, _, _ = solve_equilibrium_cells(broadwell, W[:, :2], W[:, 2:])
    # f_+ f_- = f_0^2 already holds in the first row
    assert np.array_equal(v[0], W[0, 2:])
    assert not np.array_equal(v[1], W[1, 2:])


def test_solve_equilibrium_cells_names_the_failing_row(euler_damping):
    with pytest.raises(StateSpaceExit) as e:
        solve_equilibrium_cells(euler_damping, np.array([[1.0], [-1.0]]), np.array([[0.2], [0.2]]))
    assert e.value.detail["row"] == 1
