"""Data-driven origin selection: the origin minimising the Fréchet variance over K."""
from __future__ import annotations

import logging
from typing import List, Optional, Tuple

from ..geometry.arclength import ArcConfig
from ..metrics.distances import CompositeMetric, MetricConfig
from ..metrics.separability import SeparabilityDecl
from ..model.modes import ThetaVector
from ..model.surface import ShapeModel
from .grid import OriginGrid
from .mean import Sample, frechet_mean, sample_rows, screening_variance

logger = logging.getLogger(__name__)

TIE_ABS = 1e-12
TIE_REL = 1e-10
REFINE_CANDIDATES = 3


def origin_values(
    sample: Sample,
    grid: OriginGrid,
    gamma: float,
    decl: Optional[SeparabilityDecl],
    model: ShapeModel,
    arc: Optional[ArcConfig] = None,
    refine: Optional[int] = REFINE_CANDIDATES,
) -> List[Tuple[ThetaVector, float]]:
    """Fréchet variance under d_{V,O,gamma} for every origin O of the grid.

    All candidates are ranked with ``screening_variance``; the ``refine``
    lowest (every candidate when None) get the full ``frechet_mean`` search
    and carry its variance, the rest keep their screening value.
    """
    rows = sample_rows(sample)
    decl = decl or SeparabilityDecl.default_for(model.modes)
    decl.validate(model)
    arc = arc or ArcConfig()
    candidates = grid.candidates(model)
    metrics = [CompositeMetric(model, MetricConfig(origin, gamma, arc), decl, validate=False) for origin in candidates]
    values = [screening_variance(rows, metric) for metric in metrics]
    count = len(metrics) if refine is None else max(1, min(refine, len(metrics)))
    for i in sorted(range(len(metrics)), key=lambda j: (values[j], j))[:count]:
        values[i] = frechet_mean(rows, metrics[i]).variance
    logger.debug("origin screening: %d candidates, %d refined", len(metrics), count)
    return list(zip(candidates, values))


def select_origin(
    sample: Sample,
    grid: OriginGrid,
    gamma: float,
    decl: Optional[SeparabilityDecl],
    model: ShapeModel,
    arc: Optional[ArcConfig] = None,
    refine: Optional[int] = REFINE_CANDIDATES,
) -> Tuple[ThetaVector, float]:
    """Grid origin with the smallest Fréchet variance.

    Values equal up to rounding are ties; ties go to the lexicographically
    smallest parameter vector, which is the first grid origin.
    """
    table = origin_values(sample, grid, gamma, decl, model, arc, refine)
    best = min(value for _, value in table)
    cutoff = best + TIE_ABS + TIE_REL * abs(best)
    tied = [(tuple(origin.values), origin, value) for origin, value in table if value <= cutoff]
    _, origin, value = min(tied, key=lambda item: item[0])
    logger.info("selected origin %s (Fréchet variance %.6g over %d candidates)", origin.as_dict(), value, len(table))
    return origin, float(value)
