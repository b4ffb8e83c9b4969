"""Common-shape template, modes of variation and the regression surface."""
from .design import SampledCurve, SamplingGrid, check_curves
from .modes import ModeKind, ModeSpec, ThetaVector
from .surface import (
    ManifoldPoint,
    ShapeModel,
    central_difference,
    check_local_injectivity,
    eval_model,
    mode_velocity,
    warp_curve,
)
from .template import PolynomialTemplate, eval_template

__all__ = [
    "ManifoldPoint",
    "ModeKind",
    "ModeSpec",
    "PolynomialTemplate",
    "SampledCurve",
    "SamplingGrid",
    "ShapeModel",
    "ThetaVector",
    "central_difference",
    "check_curves",
    "check_local_injectivity",
    "eval_model",
    "eval_template",
    "mode_velocity",
    "warp_curve",
]
