"""Family-level bootstrap of the full fit-and-decompose pipeline."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..errors import BootstrapAborted, TMVError
from ..fitting.alternating import FitConfig, default_modes, fit_all
from ..fitting.result import FitResult
from ..frechet.grid import OriginGrid
from ..geometry.arclength import ArcConfig
from ..metrics.distances import MetricConfig
from ..metrics.separability import SeparabilityDecl
from ..model.design import SampledCurve, SamplingGrid
from ..model.modes import ModeSpec, ThetaVector
from .variation import Decomposition, decompose

logger = logging.getLogger(__name__)

MAX_FAILURE_SHARE = 0.2
PROGRESS_EVERY = 25


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to go from curves to a Decomposition."""

    fit: FitConfig = field(default_factory=FitConfig)
    modes: Tuple[ModeSpec, ...] = field(default_factory=lambda: tuple(default_modes()))
    blocks: Optional[Tuple[Tuple[str, ...], ...]] = None
    gamma: float = 0.5
    origin: Optional[Dict[str, float]] = None
    origin_resolution: int = 9
    weighted_sse: bool = False
    arc: ArcConfig = field(default_factory=ArcConfig)

    def decl(self) -> SeparabilityDecl:
        if self.blocks is None:
            return SeparabilityDecl.default_for(self.modes)
        return SeparabilityDecl.from_names(self.modes, self.blocks)

    def metric_config(self) -> Optional[MetricConfig]:
        if self.origin is None:
            return None
        return MetricConfig(ThetaVector.from_mapping(self.modes, self.origin), self.gamma, self.arc)


def decompose_fit(fit: FitResult, cfg: PipelineConfig, gamma: Optional[float] = None) -> Decomposition:
    gamma = cfg.gamma if gamma is None else gamma
    metric_cfg = cfg.metric_config()
    if metric_cfg is not None:
        metric_cfg = metric_cfg.with_gamma(gamma)
    grid = OriginGrid.around(fit.model, fit.thetas, resolution=cfg.origin_resolution)
    return decompose(fit, metric_cfg, cfg.decl(), gamma, grid, cfg.weighted_sse, cfg.arc)


def run_pipeline(curves: Sequence[SampledCurve], grid: SamplingGrid, cfg: PipelineConfig) -> Tuple[FitResult, Decomposition]:
    fit = fit_all(curves, grid, config=cfg.fit, modes=cfg.modes)
    return fit, decompose_fit(fit, cfg)


@dataclass(frozen=True, eq=False)
class BootstrapSummary:
    """Per-quantity mean, sd, median and 5th/95th percentiles over replicates."""

    table: pd.DataFrame
    B: int
    seed: int
    failures: List[Dict[str, Any]] = field(default_factory=list)
    replicates: Optional[pd.DataFrame] = None
    origin: Optional[Dict[str, float]] = None

    def __post_init__(self) -> None:
        if self.B < 1:
            raise ValueError(f"bootstrap needs B >= 1, got {self.B}")

    @property
    def n_failed(self) -> int:
        return len(self.failures)

    def row(self, quantity: str) -> Dict[str, float]:
        return {k: float(v) for k, v in self.table.loc[quantity].items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "B": self.B,
            "seed": self.seed,
            "failures": self.n_failed,
            "failed_replicates": list(self.failures),
            "origin": self.origin,
            "summary": {q: self.row(q) for q in self.table.index},
        }


def summarize(replicates: pd.DataFrame) -> pd.DataFrame:
    """mean, sd (ddof=1, 0 for a single replicate), median, p5, p95 per column."""
    table = pd.DataFrame(
        {
            "mean": replicates.mean(),
            "sd": replicates.std(ddof=1).fillna(0.0),
            "median": replicates.median(),
            "p5": replicates.quantile(0.05),
            "p95": replicates.quantile(0.95),
        }
    )
    table.index.name = "quantity"
    return table


def replicate_row(decomposition: Decomposition) -> Dict[str, float]:
    row = {f"rss_{key}": value for key, value in decomposition.rss_per_mode.items()}
    row["rss_total"] = decomposition.rss_total
    return row


def pin_origin(curves: Sequence[SampledCurve], grid: SamplingGrid, cfg: PipelineConfig) -> PipelineConfig:
    """``cfg`` with the origin fixed; an automatic origin is selected once on the full sample."""
    if cfg.origin is not None:
        return cfg
    _, decomposition = run_pipeline(curves, grid, cfg)
    logger.info("bootstrap origin pinned at %s", decomposition.origin.as_dict())
    return replace(cfg, origin=decomposition.origin.as_dict())


def _replicate(
    curves: Sequence[SampledCurve], grid: SamplingGrid, pipeline_cfg: PipelineConfig, b: int, stream: np.random.SeedSequence
) -> Tuple[int, Optional[Dict[str, float]], Optional[str]]:
    """(b, RSS row, None) or (b, None, error text) for replicate b."""
    rng = np.random.default_rng(stream)
    index = rng.integers(0, len(curves), size=len(curves))
    sample = [curves[i] for i in index]
    cfg = replace(pipeline_cfg, fit=replace(pipeline_cfg.fit, seed=int(stream.generate_state(1)[0])))
    try:
        _, decomposition = run_pipeline(sample, grid, cfg)
    except (TMVError, ValueError, np.linalg.LinAlgError) as exc:
        return b, None, f"{type(exc).__name__}: {exc}"
    return b, replicate_row(decomposition), None


def bootstrap(
    curves: Sequence[SampledCurve],
    grid: SamplingGrid,
    pipeline_cfg: PipelineConfig,
    B: int,
    seed: int,
    workers: int = 1,
) -> BootstrapSummary:
    """Resample families with replacement and rerun fit + decompose per replicate.

    Replicate b draws from its own stream spawned from ``seed``, so results
    do not depend on execution order or on ``workers``.  With workers > 1
    replicates run in a process pool (modes must then be picklable, i.e.
    built-in modes).  Every replicate is decomposed about the same origin:
    the pinned one, or the one selected on the full sample.
    """
    if B < 1:
        raise ValueError(f"bootstrap needs B >= 1, got {B}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    curves = list(curves)
    pipeline_cfg = pin_origin(curves, grid, pipeline_cfg)
    streams = np.random.SeedSequence(seed).spawn(B)
    jobs = [(curves, grid, pipeline_cfg, b, stream) for b, stream in enumerate(streams)]
    if workers == 1:
        outcomes = (_replicate(*job) for job in jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        outcomes = pool.map(_replicate, *zip(*jobs))

    rows, failures = [], []
    try:
        for done, (b, row, error) in enumerate(outcomes, start=1):
            if error is not None:
                logger.warning("bootstrap replicate %d failed: %s", b, error)
                failures.append({"replicate": b, "error": error})
                if len(failures) > MAX_FAILURE_SHARE * B:
                    raise BootstrapAborted(f"{len(failures)} of {B} bootstrap replicates failed")
                continue
            rows.append(dict(row, replicate=b))
            if done % PROGRESS_EVERY == 0:
                logger.info("bootstrap: %d/%d replicates done", done, B)
    finally:
        if workers > 1:
            pool.shutdown(cancel_futures=True)
    replicates = pd.DataFrame(rows).set_index("replicate").sort_index()
    return BootstrapSummary(summarize(replicates), B, seed, failures, replicates, dict(pipeline_cfg.origin))
