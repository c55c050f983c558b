"""Experiment harness: config parsing, suite runners, and run artifacts."""

from .config import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config,
)
from .records import (
    ARTIFACT_VERSION,
    GoldenResult,
    RunWriter,
    compare_or_freeze,
    compare_payloads,
    read_records,
    record_line,
    strip_timing,
    verify_manifest,
)
from .suites import RUNNERS, SuiteResult, run_suite

__all__ = [
    "ARTIFACT_VERSION",
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "GoldenResult",
    "RUNNERS",
    "RunWriter",
    "SuiteResult",
    "compare_or_freeze",
    "compare_payloads",
    "config_from_dict",
    "config_hash",
    "config_to_dict",
    "load_config",
    "read_records",
    "record_line",
    "run_suite",
    "strip_timing",
    "verify_manifest",
]
