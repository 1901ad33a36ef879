from .derivatives import (
    flux_jacobian,
    partitioned_source_jacobian,
    partitioned_source_jacobian_cells,
    source_jacobian,
    source_jacobian_cells,
    spectral_radius,
    spectral_radius_cells,
)
from .subspace import max_principal_angle, null_space_basis, numerical_rank
from .system import (
    ModelSystem,
    PartitionedState,
    StateVector,
    as_state,
    from_partitioned,
    partition_cells,
    partitioned_entropy_gradient,
    partitioned_entropy_hessian,
    partitioned_source,
    require_in_state_space,
    to_partitioned,
    transform_inverse,
    unpartition_cells,
)
from .transform import (
    DelegatingSystem,
    TransformedSystem,
    apply_linear_transform,
    freeze_dissipation,
    random_transform,
)
