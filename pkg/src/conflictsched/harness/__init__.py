"""Experiment orchestration, metrics and reporting."""

from .config import ExperimentConfig, ThrottleConfig
from .experiment import (
    ExperimentReport,
    PhaseResult,
    run_continuous,
    run_experiment,
    run_phase1,
    run_phase2,
    run_repetition,
)
from .metrics import Metrics, rse
from .throttle import FixedRate, ResponseTimeController

__all__ = [
    "ExperimentConfig", "ExperimentReport", "FixedRate", "Metrics", "PhaseResult", "ResponseTimeController",
    "ThrottleConfig", "rse", "run_continuous", "run_experiment", "run_phase1", "run_phase2", "run_repetition",
]
