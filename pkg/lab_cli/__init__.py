"""
Experiment runner for retlab.

Runs modulus, retraction-continuity, BPB, perturbation and convex-lemma
experiments from JSON configs and writes deterministic CSV reports.
"""

from .config import SUBCOMMANDS, ExperimentConfig, ExperimentKind
from .experiments import RUNNERS, build_handle, run_experiment
from .reporting import ExperimentReport, write_csv, write_curve_csv, write_sidecar

__all__ = [
    "RUNNERS",
    "SUBCOMMANDS",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentReport",
    "build_handle",
    "run_experiment",
    "write_csv",
    "write_curve_csv",
    "write_sidecar",
]
