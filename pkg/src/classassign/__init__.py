"""Student-to-class assignment by minimum-cost flow, with DA and Boston baselines."""

from .analyze import (
    average_rank,
    average_utility,
    compare,
    necessary_condition,
    profile_of,
    rank_histogram,
)
from .assign import (
    build_network,
    detect_restricted_infeasibility,
    preset,
    restrict,
    solve_assignment,
)
from .core import (
    ClassInfo,
    Instance,
    Matching,
    PenaltyConstants,
    Profile,
    UtilityVector,
    penalty_constants,
    utility_of,
)
from .data import generate_instance, load_instance, save_matching
from .flow import Flow, FlowNetwork, solve_min_cost_flow
from .mechanisms import (
    boston,
    check_stability,
    deferred_acceptance,
    leftover_fill,
    single_tie_break,
)

__version__ = "0.1.0"

__all__ = [
    "average_rank",
    "average_utility",
    "boston",
    "build_network",
    "check_stability",
    "ClassInfo",
    "compare",
    "deferred_acceptance",
    "detect_restricted_infeasibility",
    "Flow",
    "FlowNetwork",
    "generate_instance",
    "Instance",
    "leftover_fill",
    "load_instance",
    "Matching",
    "necessary_condition",
    "penalty_constants",
    "PenaltyConstants",
    "preset",
    "Profile",
    "profile_of",
    "rank_histogram",
    "restrict",
    "save_matching",
    "single_tie_break",
    "solve_assignment",
    "solve_min_cost_flow",
    "utility_of",
    "UtilityVector",
]
