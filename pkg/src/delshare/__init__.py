"""Exact solver and verification library for finite decentralized stochastic
control with delayed sharing of information."""

from .exceptions import (
    BudgetExceeded,
    InconsistentHistory,
    NotSeparated,
    SeparationViolation,
    ValidationError,
)
from .filters import (
    UNREACHABLE,
    CentralBeliefPi,
    CentralBeliefTheta,
    JointDistribution,
    PrivateBelief,
    Unreachable,
    common_conditionals,
    conditional_from_joint,
    joint_distribution,
    pi_init,
    pi_update,
    private_belief_init,
    private_belief_update,
    private_conditionals,
    theta_init,
    theta_update,
)
from .info import (
    CommonInfo,
    InfoSet,
    PrivateInfo,
    StrategyProfile,
    enumerate_common,
    enumerate_infosets,
    enumerate_private,
    infoset_from_index,
    infoset_index,
    other_strategy_args,
    predecessor_infoset,
    successor_infoset,
)
from .model import (
    ProblemSpec,
    load_problem,
    make_problem,
    problem_from_dict,
    problem_hash,
    problem_to_dict,
    random_problem,
    save_problem,
    validate_problem,
)
from .solver import (
    PbpResult,
    ValueTable,
    VerifyResult,
    best_response_bruteforce,
    best_response_dp,
    cost_to_go_table,
    dp_expected_value,
    expected_cost_via_beliefs,
    expected_total_cost,
    info_state_theta_table,
    pbp_solve,
    pi_chain,
    semi_separated_table,
    separated_pi_table,
    theta_chain,
    verify_pbp,
)

__version__ = "0.1.0"
