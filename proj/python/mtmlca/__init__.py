"""Multi-task monotone-network combinatorial auctions."""

from ._core import (
    AuctionInstance,
    Bundle,
    CapacityError,
    ConfigError,
    ExhaustionError,
    InstanceConfig,
    Mvnn,
    TrainingError,
    bounded_relu,
    generate_instance,
    new_mvnn,
    optimal_true_welfare,
    run_experiment,
    run_mlca,
    solve_reported_wdp,
    summarize,
    true_value,
    wilcoxon_one_tailed,
)

__all__ = [
    "AuctionInstance",
    "Bundle",
    "CapacityError",
    "ConfigError",
    "ExhaustionError",
    "InstanceConfig",
    "Mvnn",
    "TrainingError",
    "bounded_relu",
    "generate_instance",
    "new_mvnn",
    "optimal_true_welfare",
    "run_experiment",
    "run_mlca",
    "solve_reported_wdp",
    "summarize",
    "true_value",
    "wilcoxon_one_tailed",
]
