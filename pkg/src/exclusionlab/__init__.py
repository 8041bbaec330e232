"""Exact and stochastic analysis of the capacity-k exclusion chain on a
segment and its complete multi-species companion, a card shuffle on packets.

Small instances are handled exactly: enumerated state spaces, sparse
generators, uniformized transient laws, total-variation mixing times,
censored dynamics, and closed-form eigenpairs with the bounds they imply.
Large instances run through seeded, replayable couplings whose observables
(coalescence times, the area between extremal heights, mean height profiles)
bound or estimate the same quantities.
"""

from .states import (
    Configuration,
    EnumerationBudgetError,
    InfeasibleStateError,
    KPermutation,
    Params,
    collapse_theta,
    count_configurations,
    count_kpermutations,
    enumerate_configurations,
    enumerate_kpermutations,
    extremal_states,
    format_configuration,
    format_kpermutation,
    make_configuration,
    make_kpermutation,
    parse_configuration,
    parse_kpermutation,
    project_phi,
    stationary_sep_measure,
    top_shuffle,
)
from .heights import (
    HeightFunctionSEP,
    HeightFunctionShuffle,
    Order,
    SkeletonData,
    compare_order,
    height_of_configuration,
    height_of_kpermutation,
    invert_height,
    semi_skeleton_key,
    skeleton_cuts,
    skeleton_data,
)
from .action import (
    act,
    count_action_matches,
    most_ordered_preimage,
    stabilizer_coset_count,
)
from .generator import (
    RateMatrix,
    build_censored_shuffle_generator,
    build_sep_generator,
    build_shuffle_generator,
    lump_check,
)
from .evolve import (
    censored_transient_distribution,
    mixing_time,
    transient_distribution,
    transition_matrix,
    tv_distance,
    worst_case_distance,
)
from .censoring import CensoringScheme, censor_bonds, permit_all, three_phase_schedule
from .measures import dominates, fkg_check, skeleton_marginal, smooth_and_project
from .spectral import (
    EigenPair,
    eigenfunction,
    eigenvalue,
    heat_solution,
    rough_upper_bound,
    rough_upper_bound_shuffle,
    theorem_lower_bound,
    verify_eigenpair,
    wilson_lower_bound,
)
from .coupling import (
    AreaRecord,
    CoalescenceResult,
    CoupledTrajectory,
    area_process,
    area_trace_ensemble,
    bad_configuration_flags,
    coalescence_estimate,
    mc_mean_height,
    simulate_sep_coupling,
    simulate_shuffle_grand_coupling,
)

__version__ = "0.1.0"
