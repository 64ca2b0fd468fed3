"""Local measurements that saturate the quantum Cramer-Rao bound for pure qubit models."""

from .catalog import CATALOG, build_catalog_model, catalog_reference_measurement
from .hoc import (
    HocReport,
    covariance_certificate,
    covariance_check,
    hoc_residual,
    hoc_solve_numeric,
    pair_coupling,
    planar_certificate,
    single_qubit_plane_vectors,
    solve_planar_three_qubit,
)
from .imp import (
    LmccTree,
    MStructure,
    block_trace,
    classify_m,
    coplanar_normal,
    ghz_extract,
    lmcc_build,
    orthogonal_axis,
    structure_measurement,
)
from .model import (
    GenericFamily,
    HamiltonianEncoding,
    Model,
    ScheduleEncoding,
    Segment,
    evolve_state,
    hamiltonian_model,
    m_matrix,
    metrological_generator,
    qfi,
    sld,
    state_derivative,
)
from .povm import (
    ExplicitMeasurement,
    LocalMeasurement,
    LocalPovm,
    cfi,
    measurement_projectors,
    outcome_probabilities,
    reduce_to_projective,
    saturation_check,
)

__version__ = "0.1.0"
