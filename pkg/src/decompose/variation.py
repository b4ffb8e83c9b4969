"""SSE, per-mode sums of squares and their percentage shares (RSS).

    RSS_k = 100 * SSM_k / (SSM + SSE)

SSM is the attained Fréchet function at the Fréchet mean; SSM_k collects
the embedding coordinates that belong to mode k, so SSM = sum_k SSM_k
exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..fitting.result import FitResult, residual_sse
from ..frechet.grid import OriginGrid
from ..frechet.mean import frechet_mean
from ..frechet.origin import select_origin
from ..geometry.arclength import ArcConfig
from ..metrics.distances import CompositeMetric, MetricConfig
from ..metrics.separability import SeparabilityDecl
from ..model.design import SampledCurve
from ..model.modes import ThetaVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Decomposition:
    sse: float
    ssm_per_mode: Dict[str, float]
    ssm_total: float
    rss_per_mode: Dict[str, float]
    rss_total: float
    frechet_mean: ThetaVector
    origin: ThetaVector
    gamma: float
    degenerate: bool = False
    weighted_sse: bool = False
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma,
            "origin": self.origin.as_dict(),
            "frechet_mean": self.frechet_mean.as_dict(),
            "sse": self.sse,
            "weighted_sse": self.weighted_sse,
            "ssm": dict(self.ssm_per_mode),
            "ssm_total": self.ssm_total,
            "rss": dict(self.rss_per_mode),
            "rss_total": self.rss_total,
            "degenerate": self.degenerate,
        }


def sse(curves: Sequence[SampledCurve], fit: FitResult, weighted: bool = False) -> float:
    """sum_i ||z_i - R_i||^2, optionally weighted by the curve weights."""
    per_curve = residual_sse(fit, curves)
    return float(fit.weights @ per_curve) if weighted else float(np.sum(per_curve))


def rss_shares(ssm_per_mode: Dict[str, float], error: float) -> tuple:
    """(rss_per_mode, rss_total, degenerate); 0/0 gives zeros and the degenerate flag."""
    denominator = sum(ssm_per_mode.values()) + error
    if denominator <= 0:
        return {key: 0.0 for key in ssm_per_mode}, 0.0, True
    shares = {key: 100.0 * value / denominator for key, value in ssm_per_mode.items()}
    return shares, float(sum(shares.values())), False


def decompose(
    fit: FitResult,
    metric_cfg: Optional[MetricConfig] = None,
    decl: Optional[SeparabilityDecl] = None,
    gamma: float = 0.5,
    origin_grid: Optional[OriginGrid] = None,
    weighted_sse: bool = False,
    arc: Optional[ArcConfig] = None,
) -> Decomposition:
    """Decompose the variation of a fit into per-mode shares.

    A ``metric_cfg`` pins origin and gamma.  Without one the origin is
    chosen by ``select_origin`` over ``origin_grid`` (by default the
    widened bounding box of the fitted parameters at resolution 9).
    """
    model = fit.model
    decl = decl or SeparabilityDecl.default_for(model.modes)
    if metric_cfg is None:
        arc = arc or ArcConfig()
        grid = origin_grid or OriginGrid.around(model, fit.thetas)
        origin, _ = select_origin(fit.thetas, grid, gamma, decl, model, arc)
        metric_cfg = MetricConfig(origin, gamma, arc)
    metric = CompositeMetric(model, metric_cfg, decl)
    mean = frechet_mean(fit.thetas, metric)

    error = float(fit.weights @ fit.sse) if weighted_sse else float(np.sum(fit.sse))
    ssm = dict(mean.ssm_by_mode)
    rss, rss_total, degenerate = rss_shares(ssm, error)
    if degenerate:
        logger.warning("no variation at all: SSM and SSE are both zero")
    return Decomposition(
        sse=error,
        ssm_per_mode=ssm,
        ssm_total=mean.attained_value,
        rss_per_mode=rss,
        rss_total=rss_total,
        frechet_mean=mean.mean_theta,
        origin=metric_cfg.origin,
        gamma=metric_cfg.gamma,
        degenerate=degenerate,
        weighted_sse=weighted_sse,
        diagnostics=mean.search_diagnostics,
    )


def gamma_sweep(
    fit: FitResult,
    decl: Optional[SeparabilityDecl],
    gammas: Iterable[float],
    origin: Optional[ThetaVector] = None,
    origin_grid: Optional[OriginGrid] = None,
    weighted_sse: bool = False,
    arc: Optional[ArcConfig] = None,
) -> List[Decomposition]:
    """One decomposition per gamma; the origin policy is the same for every entry."""
    arc = arc or ArcConfig()
    results = []
    for gamma in gammas:
        cfg = None if origin is None else MetricConfig(origin, float(gamma), arc)
        results.append(decompose(fit, cfg, decl, float(gamma), origin_grid, weighted_sse, arc))
        logger.info("gamma %.3g: RSS total %.4g", gamma, results[-1].rss_total)
    return results
