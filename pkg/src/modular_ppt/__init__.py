"""Numerical toolkit for PPT states: modular-operator cone geometry,
the operator/map correspondence for decomposability, and first-order
convex machinery over the PPT spectrahedron."""

from .choi import (
    DecomposableWitness,
    MapTable,
    apply_map,
    choi_from_map,
    dual_pairing_test,
    hierarchy_report,
    lemma_fi_functional,
    map_from_choi,
    random_decomposable,
    stormer_block_test,
)
from .cones import (
    CompositeGnsContext,
    ConeQuery,
    MembershipVerdict,
    build_composite,
    commutant_cone_check,
    duality_check,
    natural_cone_membership,
    pn_intersection_membership,
    separable_cone_distance,
    state_to_cone_vector,
    transpose_state_vector,
    u_maps_cones,
    v_beta_membership,
)
from .constructions import (
    AnticommutatorInstance,
    ExperimentReport,
    construct_ppt_from_cone,
    find_anticommutator_solution,
    sqrt_ppt_experiment,
    verify_anticommutator_ppt,
)
from .gns import (
    GnsContext,
    GnsVector,
    apply_delta_power,
    apply_j,
    apply_jm,
    apply_tau,
    apply_u,
    build_gns,
    transpose_operator,
    verify_modular_identities,
)
from .linalg import (
    BipartiteShape,
    herm_eig,
    kron,
    mat_sqrt_psd,
    partial_trace,
    partial_transpose,
    psd_check,
    schur_positivity,
)
from .optim import (
    PptSetSpec,
    SolveTrace,
    min_trace_over_ppt,
    npt_witness,
    project_ppt,
    project_psd,
)

__all__ = [
    "AnticommutatorInstance",
    "BipartiteShape",
    "CompositeGnsContext",
    "ConeQuery",
    "DecomposableWitness",
    "ExperimentReport",
    "GnsContext",
    "GnsVector",
    "MapTable",
    "MembershipVerdict",
    "PptSetSpec",
    "SolveTrace",
    "apply_delta_power",
    "apply_j",
    "apply_jm",
    "apply_map",
    "apply_tau",
    "apply_u",
    "build_composite",
    "build_gns",
    "choi_from_map",
    "commutant_cone_check",
    "construct_ppt_from_cone",
    "dual_pairing_test",
    "duality_check",
    "find_anticommutator_solution",
    "herm_eig",
    "hierarchy_report",
    "kron",
    "lemma_fi_functional",
    "map_from_choi",
    "mat_sqrt_psd",
    "min_trace_over_ppt",
    "natural_cone_membership",
    "npt_witness",
    "partial_trace",
    "partial_transpose",
    "pn_intersection_membership",
    "project_ppt",
    "project_psd",
    "psd_check",
    "random_decomposable",
    "schur_positivity",
    "separable_cone_distance",
    "sqrt_ppt_experiment",
    "state_to_cone_vector",
    "stormer_block_test",
    "transpose_operator",
    "transpose_state_vector",
    "u_maps_cones",
    "v_beta_membership",
    "verify_anticommutator_ppt",
    "verify_modular_identities",
]
