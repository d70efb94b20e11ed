"""POVM calculus, frame potentials and N-copy estimation fidelity."""
from .config import TOL, Tolerances
from .errors import *  # noqa: F401,F403
from .povm import (
    Povm,
    StochasticMatrix,
    are_mutually_unbiased,
    check_povm,
    coarse_grain,
    commute,
    is_equiangular,
    is_equivalent,
    is_projective,
    is_rank1,
    is_reducible,
    is_sic,
    is_unbiased,
    mu_family_check,
    purity,
    simplify,
    validate,
)
from .designs import (
    MomentEnsemble,
    WeightedStateSet,
    cross_frame_potential,
    equiangular_bound,
    frame_potential,
    half_moment_bounds,
    haar_frame_potential,
    is_t_design,
    phi_half_bounds_check,
    povm_cross_frame_potential,
    povm_frame_potential,
    povm_to_design,
    design_to_povm,
    zeta,
)
from .fidelity import (
    FidelityConstants,
    FidelityResult,
    classify_by_fidelity_signature,
    collective_fidelity,
    estimation_fidelity,
    family_sum_criteria,
    fidelity_bound_report,
    incompatibility_witness,
    optimal_estimators,
    q_map_1,
    q_map_2,
    q_map_3,
    q_map_general,
)
from .builders import (
    cmub,
    computational_basis,
    fourier_basis,
    mub_triple_d4,
    MubTripleParams,
    platonic_design,
    qubit_binary_povm,
    random_povm,
    random_rank1_povm,
    sic_d2_tetrahedron,
    sic_d3,
    triple_products,
)
from .qubit import QubitBinaryPovm, fid1, fid2_iid, fid2_pair, h_mes, qubit_compatible

__version__ = "0.1.0"
