"""Verification toolkit for channels implementable by LOCC only in the limit.

The package follows one worked construction from end to end: a protocol
tree of biased local measurements, the channel it implements when stopped
after finitely many rounds, the limiting channel with its continuum of
outcomes, and the convex geometry (zonoids of Kraus products) that
certifies which limits finite protocols can reach.
"""

from .linalg import (
    PartyDims,
    PsdReport,
    gauss_legendre,
    integrate_sqrt_smooth,
    kron,
    partial_trace,
    product_defect,
    product_factor_check,
    psd_check,
    sqrt_psd,
    trace_norm,
)
from .channels import (
    ChoiOperator,
    Instrument,
    KrausSet,
    apply,
    channel_from_leaf_povm,
    choi,
    choi_distance,
    complementary,
    isometric_relation,
    kraus_from_operators,
    kraus_rank,
    minimal_kraus,
    qc_embed,
    stinespring,
)
from .zonoid import (
    CoefficientMatrix,
    MembershipReport,
    NotInSpanError,
    ZonoidSpec,
    cmatrix_resolution_check,
    endpoint_cmatrix,
    hausdorff_estimate,
    membership,
    separation_gap,
    support_function,
    zonoid_spec_for_channel,
    zonoid_spec_for_instrument,
)
from .protocols import (
    CheckedPath,
    EndpointFamily,
    PathConditionReport,
    PiecewisePath,
    ProtocolNode,
    ProtocolParams,
    ProtocolTree,
    TreeReport,
    branch_path,
    build_protocol_2q,
    build_protocol_pq,
    c_matrix_family,
    derivative_outcomes,
    limit_path,
    main_branch_path,
    path_distance_bound,
    protocol_leaf_diagonals,
    verify_theorem_conditions,
    verify_tree,
)
from .twoqubit import (
    BlockedIsometryCheck,
    CoarseGrainCheck,
    IntegralCheck,
    TwoQubitExample,
    WStateReport,
    blocked_isometry_check,
    blocked_limiting_family,
    channel_zonoid,
    coarse_grain_check,
    concurrence,
    continuous_isometry_check,
    instrument_zonoid,
    limiting_choi_2q,
    limiting_family,
    limiting_kraus,
    limiting_povm,
    prelimit_channel,
    prelimit_choi_distance,
    two_qubit_instrument,
    wstate_analysis,
)
from .pqubit import (
    LimitCheckReport,
    PQubitSpec,
    moment_identity_check,
    multiplier_distance,
    pqubit_apply,
    pqubit_choi_formula,
    pqubit_coefficients,
    pqubit_limit_check,
    pqubit_spec,
    prelimit_coefficients,
    quadrature_coefficients,
)

__version__ = "0.1.0"

__all__ = [
    "PartyDims", "PsdReport", "gauss_legendre", "integrate_sqrt_smooth",
    "kron", "partial_trace", "product_defect", "product_factor_check",
    "psd_check", "sqrt_psd", "trace_norm",
    "ChoiOperator", "Instrument", "KrausSet", "apply",
    "channel_from_leaf_povm", "choi", "choi_distance", "complementary",
    "isometric_relation", "kraus_from_operators", "kraus_rank",
    "minimal_kraus", "qc_embed", "stinespring",
    "CoefficientMatrix", "MembershipReport", "NotInSpanError", "ZonoidSpec",
    "cmatrix_resolution_check", "endpoint_cmatrix", "hausdorff_estimate",
    "membership", "separation_gap", "support_function",
    "zonoid_spec_for_channel", "zonoid_spec_for_instrument",
    "CheckedPath", "EndpointFamily", "PathConditionReport", "PiecewisePath",
    "ProtocolNode", "ProtocolParams", "ProtocolTree", "TreeReport",
    "branch_path", "build_protocol_2q", "build_protocol_pq",
    "c_matrix_family", "derivative_outcomes", "limit_path",
    "main_branch_path", "path_distance_bound", "protocol_leaf_diagonals",
    "verify_theorem_conditions", "verify_tree",
    "BlockedIsometryCheck", "CoarseGrainCheck", "IntegralCheck",
    "TwoQubitExample", "WStateReport", "blocked_isometry_check",
    "blocked_limiting_family", "channel_zonoid", "coarse_grain_check",
    "concurrence", "continuous_isometry_check", "instrument_zonoid",
    "limiting_choi_2q", "limiting_family", "limiting_kraus",
    "limiting_povm", "prelimit_channel", "prelimit_choi_distance",
    "two_qubit_instrument", "wstate_analysis",
    "LimitCheckReport", "PQubitSpec", "moment_identity_check",
    "multiplier_distance", "pqubit_apply", "pqubit_choi_formula",
    "pqubit_coefficients", "pqubit_limit_check", "pqubit_spec",
    "prelimit_coefficients", "quadrature_coefficients",
]
