"""Regret lower bounds and regret simulation for deterministic MDPs."""

from .errors import (
    CycleLimitError,
    DegenerateOptimumError,
    DmdpError,
    DomainError,
    InfeasibleError,
    NonDisjointError,
    NotCommunicatingError,
    PolicyContractError,
    RatioUndefinedError,
    StructuralError,
    UnsupportedError,
)
from .graph import (
    WalkDecomposition,
    are_disjoint,
    decompose_walk,
    enumerate_simple_cycles,
    optimal_cycle,
)
from .lowerbound import (
    ConfusingRewards,
    CycleBound,
    LowerBoundSolution,
    information_number,
    inner_confusing,
    line_search_bound,
    solve_disjoint,
    state_dependent_bound,
)
from .model import (
    Dmdp,
    Edge,
    Family,
    Policy,
    RewardModel,
    SimpleCycle,
    cycle_gain,
    is_communicating,
    kl,
    kl_mean_derivative,
    policy_cycle,
    validate,
)
from .simulator import (
    EnvironmentState,
    SimulationTrace,
    greedy_policy,
    klucb_cycle_policy,
    oracle_policy,
    regret_ratio_report,
    run,
    step,
)
