"""Experiment runner: sweep configs, CSV rows, summary metrics and the CLI."""

from .config import ALGORITHMS, ConfigError, ExperimentConfig, parse_config
from .metrics import AccumulatedSubopt, accumulated_suboptimality, group_by, median_expansions
from .runner import (COLUMNS, RunRecord, bound_violations, expected_row_count, format_csv, iter_sweep,
                     read_csv, run_sweep, sample_instances)

__all__ = [
    "ALGORITHMS", "AccumulatedSubopt", "COLUMNS", "ConfigError", "ExperimentConfig", "RunRecord",
    "accumulated_suboptimality", "bound_violations", "expected_row_count", "format_csv", "group_by",
    "iter_sweep", "median_expansions", "parse_config", "read_csv", "run_sweep", "sample_instances",
]
