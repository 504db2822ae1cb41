"""Repeated consumer search as a multi-armed bandit with a secretary stopping rule."""

from .errors import (
    InconsistencyError,
    InvalidArgumentError,
    NonErgodicError,
    ResourceBoundError,
    SearchModelError,
    UnsupportedConfigurationError,
)
from .market import (
    EquilibriumReport,
    MarketParams,
    StoreState,
    equilibrium,
    reservation_surplus,
    reward,
    solve_fishman_system,
    steady_state,
    surplus_linear_demand,
    transition_matrix,
    transition_step,
)
from .secretary import (
    SecretarySolution,
    Table1Row,
    approx_cutoff,
    backward_induction,
    continuous_value,
    exact_cutoff,
    oracle_success_probability,
    policy_value,
    table1,
)
from .simulation import (
    EpisodeTrace,
    PolicyKind,
    PolicySpec,
    RegretReport,
    RewardMode,
    monte_carlo,
    paired_difference,
    regret_report,
    run_episode,
)
from .store_values import (
    ContinuationValues,
    ValueSequence,
    solve_continuation,
    value_sequence,
    viable_flags,
)

__version__ = "0.1.0"
