"""Solvers, oracles and instance generators for optimistic leader commitment
in congestion games with followers playing a pure Nash equilibrium."""

from .game import (
    GENERAL_SCG,
    TCLASS_SSCG,
    ClassSpec,
    Configurations,
    CostTable,
    FollowerSpec,
    Game,
    GameFormatError,
    LeaderStrategy,
    Profile,
    ValidationReport,
    congestion,
    load_game,
    load_solution,
    save_game,
    save_solution,
    validate,
)
from .equilibrium import (
    DeviationWitness,
    EnumerationCapError,
    ExpectedCostView,
    StepBudgetExhausted,
    best_response_dynamics,
    brd_trajectory,
    enumerate_outcomes,
    expected_follower_cost,
    follower_cost,
    is_nash,
    leader_cost,
    outcome_space_size,
    rosenthal_potential,
)
from .dp import (
    NeDynamicProgram,
    OptimalityCriterion,
    PureLeaderResult,
    optimal_ne_dp,
    ose_pure_leader_symmetric_scg,
    ose_pure_leader_tclass,
)
from .simplex import LpProblem, LpSolution, solve_lp
from .milp import (
    MilpModel,
    MilpParams,
    MilpSolution,
    build_milp_general,
    build_milp_tclass,
    emit_lp_format,
    extract_ose,
    solve_milp,
)
from .oracle import OseResult, ose_oracle_mixed_leader, ose_oracle_pure_leader
from .generators import (
    CnfInstance,
    KPartitionInstance,
    TrivialNoInstanceError,
    gen_random_3sat,
    gen_random_kpartition,
    gen_random_scg,
    gen_random_tclass,
    inapprox_epsilon,
    kpartition_certificate,
    kpartition_find_subset,
    reduce_3sat,
    reduce_kpartition,
    sat_brute_force,
)
from .timing import Deadline, SolveTimeout

__version__ = "0.1.0"
