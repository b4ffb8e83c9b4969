"""Arc-length based metrics on the space of variation."""
from .distances import (
    CompositeMetric,
    MetricConfig,
    c_component,
    d1,
    d2,
    dist_composite,
    dist_separable,
    dv,
    pair_images,
)
from .separability import SeparabilityDecl, check_box

__all__ = [
    "CompositeMetric",
    "MetricConfig",
    "SeparabilityDecl",
    "c_component",
    "d1",
    "d2",
    "dist_composite",
    "dist_separable",
    "dv",
    "pair_images",
    "check_box",
]
