"""Config-driven sweep front end."""

from .config import ExperimentPlan, SolverPlan, example_config, parse_config, serialize_plan
from .main import main
from .sweep import SweepRow, evaluate_point, run_sweep, select_cutoff

__all__ = [
    "ExperimentPlan",
    "SolverPlan",
    "SweepRow",
    "evaluate_point",
    "example_config",
    "main",
    "parse_config",
    "run_sweep",
    "select_cutoff",
    "serialize_plan",
]
