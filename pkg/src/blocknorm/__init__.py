"""Numerical checks, constructions and falsification for the positive
block-matrix norm inequality ``||[[A, X], [X*, B]]|| <= ||A + B||``."""

from .blockineq import (
    AlphaBeta,
    Indeterminate,
    NormalCertified,
    ProblemInstance,
    ResolventWitness,
    Trichotomy,
    Violation,
    ViolationCertificate,
    alpha_beta,
    assemble_block,
    both_arrangements_psd,
    certify,
    classify_trichotomy,
    commuting_counterexample,
    common_top_vector,
    compare_inverse_sums,
    compressed_instance,
    gap,
    make_instance,
    minimal_b_sides,
    norm_additivity_scaled,
    peel_falsify,
    resolvent_witness,
    rotation_gap,
    rotation_violation,
    schur_feasible,
    verify_certificate,
)
from .falsifier import Mode, RngStream, SearchConfig, SearchReport, hill_climb, search
from .matcore import (
    EigenDecomposition,
    PolarPair,
    ToleranceConfig,
    commutator_defect,
    herm_eigen,
    is_line_segment_range,
    is_psd,
    operator_norm,
    pd_inverse,
    polar_left,
    psd_sqrt,
    two_by_two_norm,
    unitarity_defect,
)

__version__ = "0.1.0"
