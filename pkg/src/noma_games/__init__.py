"""Game-theoretic radio-resource management for NOMA networks.

A SIC-based achievable-rate model plus four allocation games — uplink power
control, downlink coalition formation, downlink many-to-many swap matching
and uplink contention control — with brute-force oracles and a reproducible
experiment harness.
"""

from .coalition import (
    BROADBAND,
    SENSOR,
    CoalitionFormation,
    Partition,
    coalition_value,
    evaluate_switch,
    initialize_partition,
    partition_rate_report,
)
from .contention import (
    COLLISION,
    DEFERRED,
    SUCCESS,
    ContentionGame,
    ContentionOutcome,
    ContentionResources,
    contention_round,
    contention_utility,
    monte_carlo_success_rate,
    success_probability,
    update_window,
)
from .experiments import ofdma_baseline, run_experiment, write_csv
from .matching import (
    Codebook,
    Matching,
    MatchQuotas,
    SwapMatching,
    build_preference_lists,
    deferred_acceptance,
    find_swap_blocking_pair,
    matching_rate_report,
    matching_sum_rate,
    scheduled_user_count,
)
from .oracle import (
    OracleBudget,
    OracleBudgetError,
    brute_force_best_matching,
    brute_force_best_partition,
    contention_nash_certificate,
    power_nash_certificate,
)
from .power_control import PowerControlGame, best_response, user_payoff
from .rates import (
    RateReport,
    coalition_user_rate,
    downlink_sic_sinr,
    downlink_subcarrier_rates,
    inverse_gain_power_split,
    uplink_sic_sinr,
    uplink_subcarrier_rates,
)
from .scenario import ChannelState, NetworkScenario, generate_channels, sic_order
from .validation import ValidationError

__version__ = "0.1.0"

__all__ = [
    "BROADBAND",
    "COLLISION",
    "ChannelState",
    "Codebook",
    "CoalitionFormation",
    "ContentionGame",
    "ContentionOutcome",
    "ContentionResources",
    "DEFERRED",
    "MatchQuotas",
    "Matching",
    "NetworkScenario",
    "OracleBudget",
    "OracleBudgetError",
    "Partition",
    "PowerControlGame",
    "RateReport",
    "SENSOR",
    "SUCCESS",
    "SwapMatching",
    "ValidationError",
    "best_response",
    "brute_force_best_matching",
    "brute_force_best_partition",
    "build_preference_lists",
    "coalition_user_rate",
    "coalition_value",
    "contention_nash_certificate",
    "contention_round",
    "contention_utility",
    "deferred_acceptance",
    "downlink_sic_sinr",
    "downlink_subcarrier_rates",
    "evaluate_switch",
    "find_swap_blocking_pair",
    "generate_channels",
    "initialize_partition",
    "inverse_gain_power_split",
    "matching_rate_report",
    "matching_sum_rate",
    "monte_carlo_success_rate",
    "ofdma_baseline",
    "partition_rate_report",
    "power_nash_certificate",
    "run_experiment",
    "scheduled_user_count",
    "sic_order",
    "success_probability",
    "update_window",
    "uplink_sic_sinr",
    "uplink_subcarrier_rates",
    "user_payoff",
    "write_csv",
]
