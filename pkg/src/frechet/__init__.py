"""Fréchet means, variances and origin selection."""
from .grid import OriginGrid
from .mean import FrechetResult, frechet_fn, frechet_mean, frechet_mean_1d, frechet_variance, screening_variance
from .origin import origin_values, select_origin

__all__ = [
    "FrechetResult",
    "OriginGrid",
    "frechet_fn",
    "frechet_mean",
    "frechet_mean_1d",
    "frechet_variance",
    "origin_values",
    "screening_variance",
    "select_origin",
]
