"""Arc-length geometry of one-parameter mode curves."""
from .arclength import (
    ArcConfig,
    arc_coordinate,
    arc_coordinates,
    arcdist,
    arcdist_polyline,
    integrate_batch,
    signed_arcs,
)

__all__ = [
    "ArcConfig",
    "arc_coordinate",
    "arc_coordinates",
    "arcdist",
    "arcdist_polyline",
    "integrate_batch",
    "signed_arcs",
]
