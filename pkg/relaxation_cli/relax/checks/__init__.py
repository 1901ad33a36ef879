from .dissipation import check_dissipation_inequality, check_stability_ratio
from .equilibrium import (
    check_equilibrium_characterizations,
    check_equilibrium_jacobian,
    check_maxwellian_bounds,
    check_qv_invertibility,
    find_equilibria,
)
from .records import CheckRecord, Tolerances
from .sampling import SampleSpec, draw_sample, near_equilibrium_sample
from .structure import (
    check_conserved_source_components,
    check_derivative_consistency,
    check_entropy_structure,
    check_null_space_constancy,
    check_source_factorization,
)
from .suite import CHECK_NAMES, VerificationReport, check_transform_invariance, run_full_suite
