"""Ingestion, synthetic studies, reports and the command-line interface."""
from .config import StudyConfig, load_env
from .curves_io import load_curves, save_curves
from .report import build_report, emit_report, flagged_curves, validate_report
from .simulate import SimulationResult, SyntheticSpec, simulate

__all__ = [
    "SimulationResult",
    "StudyConfig",
    "SyntheticSpec",
    "build_report",
    "emit_report",
    "flagged_curves",
    "load_curves",
    "load_env",
    "save_curves",
    "simulate",
    "validate_report",
]
