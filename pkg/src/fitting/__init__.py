"""Projection and alternating template fitting."""
from .alternating import FitConfig, default_modes, fit_all, fit_template, normalize_identifiability
from .projection import default_start_box, neighbor_seed, project_curve, project_model
from .result import FitResult, residual_sse

__all__ = [
    "FitConfig",
    "FitResult",
    "default_modes",
    "default_start_box",
    "fit_all",
    "fit_template",
    "neighbor_seed",
    "normalize_identifiability",
    "project_curve",
    "project_model",
    "residual_sse",
]
