"""Experiment runner and command line interface."""

from .config import ExperimentConfig, load_config, parse_config
from .runner import CSV_COLUMNS, TrialRecord, derive_seed, mix64, run, run_cell, synthetic_video, to_csv, write_report

__all__ = [
    "CSV_COLUMNS",
    "ExperimentConfig",
    "TrialRecord",
    "derive_seed",
    "load_config",
    "mix64",
    "parse_config",
    "run",
    "run_cell",
    "synthetic_video",
    "to_csv",
    "write_report",
]
