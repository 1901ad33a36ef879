import numpy as np
import pytest
from pydantic import ValidationError

from relaxation_cli.relax.checks import (
    CHECK_NAMES,
    SampleSpec,
    Tolerances,
    check_equilibrium_jacobian,
    check_maxwellian_bounds,
    check_null_space_constancy,
    check_qv_invertibility,
    check_source_factorization,
    check_stability_ratio,
    draw_sample,
    near_equilibrium_sample,
    run_full_suite,
)
from relaxation_cli.relax.exceptions import (
    NotEquilibrium,
    RankMismatch,
    SamplingExhausted,
)
from relaxation_cli.relax.models import CATALOG, MUTATIONS, build_model

from tests.common import assert_is_equal, small_sample


def test_sample_is_reproducible(broadwell):
    a = draw_sample(broadwell, small_sample())
    b = draw_sample(broadwell, small_sample())
    assert a.shape == (40, 3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, draw_sample(broadwell, small_sample(seed=43)))


def test_sample_honours_box(euler_damping):
    box = ((1.0, 1.1), (-0.1, 0.1))
    states = draw_sample(euler_damping, SampleSpec(count=30, seed=1, box=box))
    assert states[:, 0].min() >= 1.0
    assert states[:, 0].max() <= 1.1


def test_sample_box_outside_state_space(euler_damping):
    with pytest.raises(SamplingExhausted):
        draw_sample(euler_damping, SampleSpec(count=5, box=((-2.0, -1.0), (0.0, 1.0))))


def test_sample_box_of_wrong_size(euler_damping):
    with pytest.raises(SamplingExhausted):
        draw_sample(euler_damping, SampleSpec(count=5, box=((1.0, 2.0),)))


def test_near_equilibrium_sample(euler_damping):
    states, failures = near_equilibrium_sample(euler_damping, small_sample(), count=25)
    assert states.shape == (25, 2)
    assert failures == 0
    # |m| <= 0.1 |h(u)| + 0.01 with h(u) = 0
    assert np.abs(states[:, 1]).max() <= 0.01 + 1e-12


@pytest.mark.parametrize("family", ["broadwell", "euler_damping"])
def test_small_suite_passes(family):
    report = run_full_suite(build_model(family), SampleSpec(count=100, seed=42), near_equilibrium=20)
    assert [c.name for c in report.checks] == list(CHECK_NAMES)
    failed = [(c.name, c.error) for c in report.checks if not c.passed]
    assert failed == []
    assert report.passed


def test_report_is_deterministic(broadwell):
    first = run_full_suite(broadwell, small_sample(), near_equilibrium=10)
    second = run_full_suite(broadwell, small_sample(), near_equilibrium=10)
    assert_is_equal(first.to_dict(), second.to_dict())
    assert first.to_json() == second.to_json()


def test_sampling_failure_still_gives_a_report(euler_damping):
    # no state of the box has rho > 0 up to rounding
    spec = SampleSpec(count=20, box=((-1.0, 0.0), (-1.0, 1.0)))
    report = run_full_suite(euler_damping, spec, near_equilibrium=5)
    assert [c.name for c in report.checks] == list(CHECK_NAMES)
    for record in report.checks:
        assert not record.passed
        assert record.error.startswith("SamplingExhausted"), record.error
    assert not report.passed
    assert report.to_dict()["sample"]["box"] == [[-1.0, 0.0], [-1.0, 1.0]]


def test_report_echoes_the_sample(euler_damping):
    report = run_full_suite(euler_damping, SampleSpec(count=30, seed=7), near_equilibrium=5)
    data = report.to_dict()
    assert data["sample"] == {"count": 30, "seed": 7, "box": None}
    assert data["model_id"] == "euler_damping"
    assert data["tolerances"]["analytic"] == 1e-10


@pytest.mark.parametrize("mutation", sorted(MUTATIONS))
def test_mutation_fails_exactly_its_targets(mutation):
    model = build_model("euler_damping", mutate=mutation)
    assert model.model_id == f"euler_damping+{mutation}"
    report = run_full_suite(model, SampleSpec(count=100, seed=42), near_equilibrium=20)
    failed = {c.name for c in report.checks if not c.passed}
    assert failed == set(MUTATIONS[mutation].targets)
    assert not report.passed


@pytest.mark.parametrize("mutation", sorted(MUTATIONS))
@pytest.mark.parametrize(
    "family,params,rank", [("broadwell", None, 1), ("euler_damping", {"d": 2}, 2)]
)
def test_mutation_targets_on_other_models(family, params, rank, mutation):
    base = build_model(family, params)
    baseline = run_full_suite(base, SampleSpec(count=100, seed=42), near_equilibrium=20)
    assert baseline.passed
    model = build_model(family, params, mutate=mutation)
    assert model.r == rank
    report = run_full_suite(model, SampleSpec(count=100, seed=42), near_equilibrium=20)
    failed = {c.name for c in report.checks if not c.passed}
    assert failed == set(model.failing_checks())
    if rank != 1:
        assert report.get("stability_ratio").details["vacuous"]


def test_unknown_mutation():
    with pytest.raises(ValueError):
        build_model("broadwell", mutate="drop-entropy")


def test_crossing_rank_is_reported(crossing_rank):
    # U_1 takes lattice values, 0 among them
    spec = SampleSpec(count=300, seed=42)
    with pytest.raises(RankMismatch):
        check_null_space_constancy(crossing_rank, spec)
    report = run_full_suite(crossing_rank, spec, near_equilibrium=10)
    record = report.get("null_space_constancy")
    assert not record.passed
    assert record.error.startswith("RankMismatch")
    assert record.to_dict()["worst_residual"] is None


def test_equilibrium_jacobian_rejects_non_equilibria(euler_damping):
    with pytest.raises(NotEquilibrium):
        check_equilibrium_jacobian(euler_damping, [np.array([1.0, 0.5])])


def test_equilibrium_jacobian_at_rest(euler_damping):
    record = check_equilibrium_jacobian(euler_damping, [np.array([1.0, 0.0]), np.array([1.5, 0.0])])
    assert record.passed
    assert record.details["equilibria"] == 2


def test_viscoelastic_qv_is_well_conditioned(viscoelastic):
    record = check_qv_invertibility(viscoelastic, [np.array([1.0, 0.0, 0.5])])
    assert record.passed
    assert record.worst_residual == pytest.approx(1.0)


def test_euler_damping_maxwellian_bounds(euler_damping):
    states = np.array([[1.0, 0.3], [1.5, -0.2], [0.7, 0.05]])
    record = check_maxwellian_bounds(euler_damping, states)
    assert record.passed
    # |Q| = |m| = |U - M(U)|
    assert record.details["lower_ratio"] == pytest.approx(1.0, rel=1e-9)
    assert record.details["upper_ratio"] == pytest.approx(1.0, rel=1e-9)
    assert record.details["evaluated"] == 3


def test_source_factorization_record(broadwell):
    record = check_source_factorization(broadwell, small_sample())
    assert record.passed
    assert record.worst_residual <= record.tolerance
    assert len(record.worst_state) == 3


def test_stability_ratio_is_vacuous_for_higher_rank(radiation_hydro):
    record = check_stability_ratio(radiation_hydro, small_sample())
    assert record.passed
    assert record.details["vacuous"] is True


def test_stability_ratio_of_flipped_source():
    model = build_model("viscoelastic", mutate="flip-source")
    record = check_stability_ratio(model, small_sample())
    assert not record.passed
    assert record.details["violations"] > 0


@pytest.mark.parametrize("field", ["analytic", "fd", "angle", "max_condition", "min_bound_ratio"])
def test_tolerances_must_be_positive(field):
    with pytest.raises(ValidationError):
        Tolerances(**{field: 0.0})


def test_scaled_tolerances():
    scaled = Tolerances().scaled(10.0)
    assert scaled.analytic == pytest.approx(1e-9)
    assert scaled.min_bound_ratio == pytest.approx(1e-4)
    assert scaled.max_condition == Tolerances().max_condition


@pytest.mark.slow
@pytest.mark.parametrize("family", CATALOG)
def test_catalog_passes_full_verification(family):
    report = run_full_suite(build_model(family), SampleSpec(count=1000, seed=42))
    assert report.passed, {c.name: c.error or c.worst_residual for c in report.checks if not c.passed}
