"""Causal bandit parent search, exact calculators and experiment runner."""

from ._core import (
    Dag,
    build_scm_json,
    dary_tree_bound,
    er_fast_threshold,
    er_multiparent_threshold,
    expected_interventions,
    expected_interventions_recursive,
    enumerate_permutation_mean,
    generate,
    lower_bound,
    raps_oracle,
    raps_statistical,
    required_batch_size,
    run_experiment,
    figure_config_json,
)

__all__ = [
    "Dag",
    "build_scm_json",
    "dary_tree_bound",
    "er_fast_threshold",
    "er_multiparent_threshold",
    "expected_interventions",
    "expected_interventions_recursive",
    "enumerate_permutation_mean",
    "generate",
    "lower_bound",
    "raps_oracle",
    "raps_statistical",
    "required_batch_size",
    "run_experiment",
    "figure_config_json",
]
