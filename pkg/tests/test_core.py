import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest_lazyfixture import lazy_fixture

from relaxation_cli.relax.checks import SampleSpec, draw_sample
from relaxation_cli.relax.core import (
    ModelSystem,
    PartitionedState,
    apply_linear_transform,
    flux_jacobian,
    freeze_dissipation,
    from_partitioned,
    max_principal_angle,
    null_space_basis,
    numerical_rank,
    partition_cells,
    random_transform,
    source_jacobian,
    source_jacobian_cells,
    spectral_radius,
    spectral_radius_cells,
    to_partitioned,
    unpartition_cells,
)
from relaxation_cli.relax.core.derivatives import fd_flux_jacobian
from relaxation_cli.relax.exceptions import (
    DimensionMismatch,
    RankDeclarationError,
    SingularTransform,
    StateSpaceViolation,
)
from relaxation_cli.relax.models import CATALOG, CrossingRank, build_model


def test_broadwell_flux_jacobian_is_the_speed_diagonal(broadwell):
    for U in ([1.0, 1.0, 1.0], [2.0, 1.0, 0.5], [4.0, 2.0, 1.0]):
        assert np.array_equal(flux_jacobian(broadwell, U), np.diag([1.0, 0.0, -1.0]))


def test_euler_damping_flux_jacobian_at_rest(euler_damping):
    assert np.allclose(flux_jacobian(euler_damping, [1.0, 0.0]), [[0.0, 1.0], [1.0, 0.0]])


def test_finite_differences_match_linear_flux(broadwell):
    U = np.array([2.0, 1.0, 0.5])
    assert np.abs(fd_flux_jacobian(broadwell, U) - flux_jacobian(broadwell, U)).max() < 1e-9


def test_flux_jacobian_rejects_bad_direction(euler_damping):
    with pytest.raises(DimensionMismatch):
        flux_jacobian(euler_damping, [1.0, 0.0], j=1)


def test_flux_jacobian_finite_differences_leave_state_space(viscoelastic):
    # central steps around nu = 1e-7 cross nu = 0
    with pytest.raises(StateSpaceViolation):
        fd_flux_jacobian(viscoelastic, [1e-7, 0.0, 0.5])


def test_spectral_radius_uses_wave_speed(euler_damping):
    assert spectral_radius(euler_damping, np.array([2.0, 1.0])) == pytest.approx(1.5)


def test_identity_partition(euler_damping):
    state = to_partitioned(euler_damping, [1.0, 2.0])
    assert state.u.tolist() == [1.0]
    assert state.v.tolist() == [2.0]
    U = from_partitioned(euler_damping, PartitionedState(u=np.array([1.0]), v=np.array([2.0])))
    assert U.tolist() == [1.0, 2.0]


def test_radiation_partition_collects_radiative_energy(radiation_hydro):
    U = radiation_hydro.reference_state() + np.array([0.0, 0.1, 0.0, 0.0, 0.2, 0.3, 0.4])
    state = to_partitioned(radiation_hydro, U)
    assert state.u.shape == (5,)
    assert state.v.shape == (2,)
    assert state.u[4] == pytest.approx(U[4] + radiation_hydro.C * (U[5] + U[6]))
    assert np.allclose(state.v, U[5:])


@pytest.mark.parametrize("family", CATALOG)
def test_partition_round_trip(family):
    model = build_model(family)
    for U in draw_sample(model, SampleSpec(count=100, seed=3)):
        back = from_partitioned(model, to_partitioned(model, U))
        assert np.abs(back - U).max() <= 1e-12 * (1.0 + np.abs(U).max())


def test_partition_rejects_wrong_length(broadwell):
    with pytest.raises(DimensionMismatch):
        to_partitioned(broadwell, [1.0, 1.0])
    with pytest.raises(DimensionMismatch):
        from_partitioned(broadwell, PartitionedState(u=np.ones(2), v=np.ones(2)))


@given(st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=3, max_size=3))
@settings(max_examples=50, deadline=None)
def test_broadwell_partition_round_trip_property(f):
    model = build_model("broadwell")
    U = np.array(f)
    assert np.allclose(from_partitioned(model, to_partitioned(model, U)), U, rtol=1e-13, atol=0)


@given(
    st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=1, max_size=6),
    st.integers(min_value=0, max_value=3),
)
@settings(max_examples=50, deadline=None)
def test_rank_and_kernel_of_diagonal_matrices(values, zeros):
    matrix = np.diag(values + [0.0] * zeros)
    assert numerical_rank(matrix) == len(values)
    basis, singular_values = null_space_basis(matrix)
    assert basis.shape == (len(values) + zeros, zeros)
    assert singular_values.size == len(values) + zeros


def test_principal_angle_of_different_dimensions_is_a_right_angle():
    assert max_principal_angle(np.eye(3)[:, :1], np.eye(3)[:, :2]) == pytest.approx(np.pi / 2)


def test_principal_angle_between_lines():
    a = np.array([[1.0], [0.0]])
    b = np.array([[1.0], [1.0]])
    assert max_principal_angle(a, b) == pytest.approx(np.pi / 4)


@given(st.integers(min_value=2, max_value=8), st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_random_transform_respects_the_condition_cap(n, seed):
    P = random_transform(n, np.random.default_rng(seed), condition=1e3)
    assert np.linalg.cond(P) <= 1e3


@pytest.mark.parametrize(
    "model", [lazy_fixture("euler_damping"), lazy_fixture("broadwell"), lazy_fixture("viscoelastic")]
)
def test_identity_transform_changes_nothing(model):
    transformed = apply_linear_transform(model, np.eye(model.n))
    for U in draw_sample(model, SampleSpec(count=50, seed=11)):
        assert np.allclose(transformed.flux(U, 0), model.flux(U, 0), rtol=1e-14, atol=1e-14)
        assert np.allclose(transformed.source(U), model.source(U), rtol=1e-14, atol=1e-14)
        assert transformed.entropy(U) == pytest.approx(model.entropy(U), rel=1e-14, abs=1e-14)
        assert np.allclose(
            transformed.dissipation_matrix(U), model.dissipation_matrix(U), rtol=1e-14, atol=1e-14
        )


def test_transformed_entropy_agrees(euler_damping, rng):
    P_new = random_transform(euler_damping.n, rng)
    transformed = apply_linear_transform(euler_damping, P_new)
    assert transformed.model_id == "euler_damping+transform"
    for U in draw_sample(euler_damping, SampleSpec(count=50, seed=5)):
        V = P_new @ U
        assert transformed.entropy(V) == pytest.approx(euler_damping.entropy(U), rel=1e-12, abs=1e-12)
        # P~ V = P U keeps the partition of the original variables
        assert np.allclose(transformed.transform @ V, euler_damping.transform @ U, atol=1e-12)


def test_transformed_dissipation_matrix_is_congruent(broadwell, rng):
    P_new = random_transform(broadwell.n, rng)
    transformed = apply_linear_transform(broadwell, P_new)
    U = np.array([2.0, 1.0, 0.5])
    expected = P_new @ broadwell.dissipation_matrix(U) @ P_new.T
    assert np.allclose(transformed.dissipation_matrix(P_new @ U), expected, atol=1e-12)


@pytest.mark.parametrize(
    "P_new",
    [np.zeros((2, 2)), np.array([[1.0, 1.0], [1.0, 1.0]]), np.eye(3)],
)
def test_singular_or_misshaped_transform(euler_damping, P_new):
    with pytest.raises(SingularTransform):
        apply_linear_transform(euler_damping, P_new)


def test_transform_condition_cap(euler_damping):
    with pytest.raises(SingularTransform):
        apply_linear_transform(euler_damping, np.diag([1.0, 1e-9]), max_condition=1e8)


def test_freeze_dissipation_keeps_matrix(broadwell):
    frozen_at = np.array([4.0, 2.0, 1.0])
    frozen = freeze_dissipation(broadwell, frozen_at)
    assert frozen.model_id == "broadwell+frozen"
    U = np.array([2.0, 1.0, 1.0])
    L = broadwell.dissipation_matrix(frozen_at)
    assert np.array_equal(frozen.dissipation_matrix(U), L)
    assert np.allclose(frozen.source(U), -L @ broadwell.entropy_gradient(U))


def test_freeze_dissipation_outside_state_space(broadwell):
    with pytest.raises(StateSpaceViolation):
        freeze_dissipation(broadwell, [1.0, -1.0, 1.0])


def test_declared_rank_is_cross_checked():
    class WrongRank(CrossingRank):
        def __init__(self):
            ModelSystem.__init__(self, n=2, d=1, r=1)

    with pytest.raises(RankDeclarationError):
        WrongRank()


def _grid_models():
    yield build_model("broadwell")
    yield build_model("planar_broadwell")
    yield build_model("euler_damping")
    yield build_model("euler_damping", {"d": 2, "law": "gamma-law", "gamma": 1.4})
    yield build_model("radiation_hydro")
    yield build_model("euler_damping", {"d": 2}, mutate="swap-flux")
    base = build_model("euler_damping", {"d": 2})
    yield freeze_dissipation(base, base.reference_state())
    yield freeze_dissipation(build_model("broadwell"), [1.0, 2.0, 3.0])


@pytest.mark.parametrize("model", list(_grid_models()), ids=lambda m: m.model_id)
def test_cell_methods_match_single_states(model):
    states = draw_sample(model, SampleSpec(count=15, seed=3))

    def stacked(f):
        return np.array([f(U) for U in states])

    for j in range(model.d):
        assert np.allclose(model.flux_cells(states, j), stacked(lambda U: model.flux(U, j)))
        assert np.allclose(
            spectral_radius_cells(model, states, j),
            stacked(lambda U: spectral_radius(model, U, j)),
        )
    assert np.allclose(model.source_cells(states), stacked(model.source), atol=1e-12)
    assert np.allclose(model.entropy_cells(states), stacked(model.entropy))
    assert np.allclose(model.entropy_gradient_cells(states), stacked(model.entropy_gradient))
    assert np.allclose(model.entropy_hessian_cells(states), stacked(model.entropy_hessian))
    assert np.allclose(
        source_jacobian_cells(model, states),
        stacked(lambda U: source_jacobian(model, U)),
        atol=1e-7,
    )
    assert model.in_state_space_cells(states).all()
    outside = states.copy()
    outside[1, 0] = -1.0
    assert model.in_state_space_cells(outside).tolist() == [
        model.in_state_space(U) for U in outside
    ]


def test_partition_cells_matches_single_states(broadwell):
    states = draw_sample(broadwell, SampleSpec(count=10, seed=3))
    u, v = partition_cells(broadwell, states)
    for row, U in enumerate(states):
        state = to_partitioned(broadwell, U)
        assert np.allclose(u[row], state.u) and np.allclose(v[row], state.v)
    assert np.allclose(unpartition_cells(broadwell, u, v), states, atol=1e-12)


def test_cell_methods_accept_no_cells(euler_damping):
    empty = np.empty((0, 2))
    assert euler_damping.flux_cells(empty, 0).shape == (0, 2)
    assert euler_damping.entropy_hessian_cells(empty).shape == (0, 2, 2)
    assert spectral_radius_cells(euler_damping, empty).shape == (0,)
