import numpy as np
import pytest

from relaxation_cli.relax.checks import SampleSpec, draw_sample
from relaxation_cli.relax.core import (
    max_principal_angle,
    null_space_basis,
    partitioned_source,
    partitioned_source_jacobian,
)
from relaxation_cli.relax.core.derivatives import fd_gradient
from relaxation_cli.relax.exceptions import (
    ConstructionError,
    InvalidPressureLaw,
    ModelNotRegistered,
    NonNegativityViolation,
    SubcharacteristicViolation,
    SymmetryViolation,
)
from relaxation_cli.relax.models import (
    CATALOG,
    CollisionTable,
    EulerDamping,
    ModelRepository,
    PressureLaw,
    build_model,
)


def sample(model, count=100, seed=42):
    return draw_sample(model, SampleSpec(count=count, seed=seed))


def test_catalog_is_registered():
    models = ModelRepository.get_instance().list_models()
    for family in CATALOG + ("dvm", "carleman", "planar_broadwell", "crossing_rank"):
        assert family in models


def test_unknown_family():
    with pytest.raises(ModelNotRegistered):
        build_model("navier")


@pytest.mark.parametrize(
    "family,n,d,r",
    [
        ("euler_damping", 2, 1, 1),
        ("nonlinear_optics", 7, 3, 1),
        ("vibrational_gas", 4, 1, 1),
        ("viscoelastic", 3, 1, 1),
        ("radiation_hydro", 7, 3, 2),
        ("reactive_euler", 6, 3, 1),
        ("broadwell", 3, 1, 1),
        ("carleman", 2, 1, 1),
        ("planar_broadwell", 4, 2, 1),
    ],
)
def test_dimensions(family, n, d, r):
    model = build_model(family)
    assert (model.n, model.d, model.r) == (n, d, r)


@pytest.mark.parametrize("family", CATALOG)
def test_reference_state_is_admissible(family):
    model = build_model(family)
    assert model.in_state_space(model.reference_state())


# euler_damping


def test_euler_damping_source(euler_damping):
    assert euler_damping.source(np.array([1.0, 2.0])).tolist() == [0.0, -2.0]


@pytest.mark.parametrize("rho", [0.5, 1.0, 1.7])
def test_euler_damping_rest_is_equilibrium(euler_damping, rho):
    U = np.array([rho, 0.0])
    assert not np.any(euler_damping.source(U))
    assert euler_damping.entropy_gradient(U)[1] == 0.0


def test_euler_damping_isothermal_entropy(euler_damping):
    rho, m = 2.0, 1.0
    expected = m * m / (2 * rho) + rho * np.log(rho) - rho
    assert euler_damping.entropy(np.array([rho, m])) == pytest.approx(expected)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_euler_damping_factorization(d):
    model = build_model("euler_damping", {"d": d})
    for U in sample(model):
        residual = model.source(U) + model.dissipation_matrix(U) @ model.entropy_gradient(U)
        assert np.abs(residual).max() <= 1e-12


def test_euler_damping_gamma_law():
    model = build_model("euler_damping", {"law": "gamma-law", "gamma": 1.4})
    assert model.law.pressure(2.0) == pytest.approx(2.0**1.4)


@pytest.mark.parametrize(
    "kind,gamma,scale", [("isothermal", 1.0, -1.0), ("gamma-law", 0.5, 1.0), ("polytropic", 2.0, 1.0)]
)
def test_invalid_pressure_law(kind, gamma, scale):
    with pytest.raises(InvalidPressureLaw):
        PressureLaw(kind, gamma, scale)


def test_euler_damping_rejects_dimension():
    with pytest.raises(ValueError):
        ModelRepository.get_instance().parse_params("euler_damping", {"d": 4})
    assert isinstance(EulerDamping(d=3), EulerDamping)


# nonlinear_optics


def test_nonlinear_optics_source(nonlinear_optics):
    U = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
    assert nonlinear_optics.electric_field(U).tolist() == [0.5, 0.0, 0.0]
    assert nonlinear_optics.source(U)[6] == pytest.approx(-0.75)


def test_nonlinear_optics_equilibrium(nonlinear_optics):
    # |E|^2 = chi with chi = 1 needs |D| = 2
    U = np.array([0.0, 2.0, 0.0, 0.3, -0.1, 0.0, 1.0])
    assert nonlinear_optics.source(U)[6] == pytest.approx(0.0, abs=1e-15)


def test_nonlinear_optics_hessian_positive_definite(nonlinear_optics):
    for U in sample(nonlinear_optics):
        assert np.linalg.eigvalsh(nonlinear_optics.entropy_hessian(U)).min() > 0


# vibrational_gas


def test_vibrational_gas_equal_temperatures(vibrational_gas):
    U = vibrational_gas.reference_state()
    theta_1, theta_2 = vibrational_gas.temperatures(U)
    assert theta_1 == pytest.approx(theta_2)
    assert np.abs(vibrational_gas.source(U)).max() == pytest.approx(0.0, abs=1e-15)


def test_vibrational_gas_entropy_derivative_in_q(vibrational_gas):
    for U in sample(vibrational_gas):
        theta_1, theta_2 = vibrational_gas.temperatures(U)
        fd = fd_gradient(vibrational_gas.entropy, U, vibrational_gas.in_state_space)
        assert fd[3] == pytest.approx(1.0 / theta_1 - 1.0 / theta_2, rel=1e-6, abs=1e-6)


def test_vibrational_gas_relaxation_coefficient(vibrational_gas):
    for U in sample(vibrational_gas):
        theta_1, theta_2 = vibrational_gas.temperatures(U)
        L = vibrational_gas.dissipation_matrix(U)
        assert L[3, 3] == pytest.approx(vibrational_gas.a * theta_1 * theta_2)
        assert L[3, 3] > 0


def test_vibrational_gas_rejects_non_positive_temperature(vibrational_gas):
    # all energy kinetic: theta_1 = 0
    assert not vibrational_gas.in_state_space(np.array([1.0, 2.0, 3.0, 1.0]))


# viscoelastic


def test_viscoelastic_equilibrium(viscoelastic):
    nu = 1.3
    # p = -g(nu) with w = p + E nu
    U = np.array([nu, 0.2, -viscoelastic.stress.g(nu) + viscoelastic.E * nu])
    assert viscoelastic.source(U)[2] == pytest.approx(0.0, abs=1e-15)


def test_viscoelastic_default_source(viscoelastic):
    # nu = 1, u = 0, p = 0: q = -g(1) = -E / 2
    U = np.array([1.0, 0.0, 1.0])
    assert partitioned_source(viscoelastic, U).tolist() == [-0.5]
    assert viscoelastic.stress.h_inverse(-0.5) == pytest.approx(1.0)


def test_viscoelastic_dissipation_positive(viscoelastic):
    for U in sample(viscoelastic):
        assert viscoelastic.dissipation_matrix(U)[2, 2] > 0


def test_viscoelastic_nonlinear_stress_inverse():
    model = build_model("viscoelastic", {"E": 2.0, "kappa": 0.8, "beta": 0.3})
    for y in (-1.5, 0.0, 0.4, 2.0):
        assert model.stress.h(model.stress.h_inverse(y)) == pytest.approx(y, abs=1e-12)


@pytest.mark.parametrize("params", [{"E": 1.0, "kappa": 1.5}, {"E": 1.0, "kappa": 0.2, "beta": -0.5}])
def test_viscoelastic_subcharacteristic_violation(params):
    with pytest.raises(SubcharacteristicViolation):
        build_model("viscoelastic", params)


# radiation_hydro


def test_radiation_sigma_at_equilibrium(radiation_hydro):
    U = radiation_hydro.reference_state()
    assert np.abs(radiation_hydro.source(U)).max() == pytest.approx(0.0, abs=1e-15)
    # theta^2 B'(theta) at theta = 1
    assert np.allclose(radiation_hydro.sigma(U), 4.0)


def test_radiation_sigma_is_continuous_through_equilibrium(radiation_hydro):
    U = radiation_hydro.reference_state()
    B = U[5]
    values = []
    for t in np.linspace(-1e-6, 1e-6, 41):
        W = U.copy()
        W[5:] = B * (1.0 + t)
        values.append(radiation_hydro.sigma(W))
    values = np.array(values)
    assert np.all(np.isfinite(values))
    assert np.abs(np.diff(values, axis=0)).max() <= 1e-6 * np.abs(values).max()


def test_radiation_sigma_positive(radiation_hydro):
    for U in sample(radiation_hydro):
        assert np.all(radiation_hydro.sigma(U) > 0)


def test_radiation_kernel_is_state_independent(radiation_hydro):
    declared = radiation_hydro.conserved_rows.T
    for U in sample(radiation_hydro, count=50):
        kernel, _ = null_space_basis(radiation_hydro.dissipation_matrix(U))
        assert max_principal_angle(kernel, declared) <= 1e-8


def test_radiation_rejects_cold_states(radiation_hydro):
    U = radiation_hydro.reference_state()
    U[4] = 0.1
    assert not radiation_hydro.in_state_space(U)


def test_radiation_rejects_non_unit_directions():
    with pytest.raises(ConstructionError):
        build_model("radiation_hydro", {"directions": [[2.0, 0.0, 0.0]]})


# reactive_euler


def test_reactive_euler_mass_production_vanishes(reactive_euler):
    masses = reactive_euler.network.m
    for U in sample(reactive_euler):
        omega = reactive_euler.production_rates(U)
        assert abs(masses @ omega) <= 1e-14 * (1.0 + np.abs(omega).max())


def test_reactive_euler_chemical_equilibrium(reactive_euler):
    net = reactive_euler.network
    theta = 1.0
    K = net.equilibrium_constants(theta)[0]
    densities = np.array([0.3, 0.3 * K])
    U = reactive_euler._conserved(densities, np.zeros(3), theta)
    assert reactive_euler.temperature(U) == pytest.approx(theta)
    forward = net.forward_rates(theta)[0] * densities[0]
    assert abs(reactive_euler.rates_of_progress(U)[0]) <= 1e-12 * forward


def test_reactive_euler_factorization(reactive_euler):
    for U in sample(reactive_euler):
        Q = reactive_euler.source(U)
        factorized = -reactive_euler.dissipation_matrix(U) @ reactive_euler.entropy_gradient(U)
        assert np.linalg.norm(Q - factorized) <= 1e-10 * (1.0 + np.linalg.norm(Q))


def test_reactive_euler_element_conservation():
    with pytest.raises(ConstructionError):
        build_model("reactive_euler", {"element_matrix": [[1.0], [2.0]]})


# discrete velocity models


def test_broadwell_uniform_state(broadwell):
    U = np.ones(3)
    assert not np.any(broadwell.entropy_gradient(U))
    assert not np.any(broadwell.source(U))


def test_broadwell_source(broadwell):
    # f_0^2 - f_+ f_- for the moving populations
    assert np.allclose(broadwell.source(np.array([2.0, 1.0, 1.0])), [-1.0, 2.0, -1.0])
    assert np.allclose(broadwell.source(np.array([4.0, 2.0, 1.0])), 0.0)


@pytest.mark.parametrize("U", [[2.0, 1.0, 1.0], [0.7, 3.1, 1.9], [4.0, 2.0, 1.0]])
def test_broadwell_factorization(broadwell, U):
    U = np.array(U)
    Q = broadwell.source(U)
    factorized = -broadwell.dissipation_matrix(U) @ broadwell.entropy_gradient(U)
    assert np.abs(Q - factorized).max() <= 1e-12 * (1.0 + np.abs(U).max() ** 2)


def test_dvm_quadratic_form(broadwell, rng):
    for U in sample(broadwell):
        y = rng.standard_normal(3)
        T = broadwell.weights(U)
        combination = (
            y[:, None, None, None]
            + y[None, :, None, None]
            - y[None, None, :, None]
            - y[None, None, None, :]
        )
        expected = 0.25 * np.sum(T * combination**2)
        assert y @ broadwell.dissipation_matrix(U) @ y == pytest.approx(expected, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("family", ["broadwell", "carleman", "planar_broadwell"])
def test_collision_invariants(family):
    model = build_model(family)
    for U in sample(model):
        Q = model.source(U)
        assert np.abs(model.conserved_rows @ Q).max() <= 1e-12 * (1.0 + np.abs(U).max() ** 2)


def test_broadwell_qv_is_negative(broadwell):
    q_v = partitioned_source_jacobian(broadwell, np.array([4.0, 2.0, 1.0]))[2:, 2:]
    assert q_v.shape == (1, 1)
    assert q_v[0, 0] < 0


def test_collision_table_symmetry():
    with pytest.raises(SymmetryViolation):
        CollisionTable.from_entries([[1.0], [-1.0]], [(0, 0, 1, 1, 1.0)])


def test_collision_table_non_negative():
    with pytest.raises(NonNegativityViolation):
        CollisionTable.from_entries(
            [[1.0], [-1.0]], [(0, 0, 1, 1, -1.0), (1, 1, 0, 0, -1.0)]
        )


def test_generic_dvm_from_params():
    model = build_model(
        "dvm",
        {
            "velocities": [[1.0], [-1.0]],
            "entries": [(0, 0, 1, 1, 2.0), (1, 1, 0, 0, 2.0)],
        },
    )
    assert (model.n, model.r) == (2, 1)
    assert np.allclose(model.source(np.array([2.0, 1.0])), [-6.0, 6.0])
