"""Transaction inclusion with signaling for DAG blockchains."""

from ._core import (
    BloomFilter,
    ConfigError,
    bf_false_positive_rate,
    bf_flood_threshold,
    delay_attack_expectation,
    equilibrium_strategy,
    expected_revenue,
    reward_coefficient,
    run_experiment,
    simulate,
    strategy_top_n,
    utilization,
)

__all__ = [
    "BloomFilter",
    "ConfigError",
    "bf_false_positive_rate",
    "bf_flood_threshold",
    "delay_attack_expectation",
    "equilibrium_strategy",
    "expected_revenue",
    "reward_coefficient",
    "run_experiment",
    "simulate",
    "strategy_top_n",
    "utilization",
]
