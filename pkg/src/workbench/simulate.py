"""Synthetic studies drawn from the shape-invariant model, with their oracle decomposition."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..decompose.bootstrap import PipelineConfig, decompose_fit
from ..decompose.variation import Decomposition
from ..errors import InvalidModel
from ..fitting.alternating import normalize_identifiability
from ..fitting.result import FitResult
from ..model.design import SampledCurve, SamplingGrid
from ..model.modes import ModeKind, ModeSpec
from ..model.surface import ShapeModel
from ..model.template import PolynomialTemplate

logger = logging.getLogger(__name__)

DEFAULT_COEFFICIENTS = (2.0, 0.3, -1.5, -0.2, -0.3)
NOISE_SHARE = 0.02
W_FLOOR = 0.05
Law = Tuple[str, float, float]


def default_laws(modes: Sequence[ModeSpec], grid: SamplingGrid, template_range: float) -> Dict[str, Law]:
    laws: Dict[str, Law] = {}
    for mode in modes:
        if mode.kind is ModeKind.GENERALIST_SPECIALIST:
            laws[mode.name] = ("uniform", 0.8, 1.25)
        elif mode.kind is ModeKind.HORIZONTAL_SHIFT:
            laws[mode.name] = ("normal", 0.0, 0.08 * grid.span)
        elif mode.kind is ModeKind.VERTICAL_SHIFT:
            laws[mode.name] = ("normal", 0.0, 0.1 * template_range)
        else:
            laws[mode.name] = ("normal", 0.0, 0.5)
    return laws


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator of a synthetic study.

    ``laws`` maps a parameter name to ``("uniform", lo, hi)`` or
    ``("normal", mean, sd)``; missing names use the default laws.  The
    generalist-specialist law is truncated: draws below 0.05 are redrawn.
    ``noise_sd`` of None means 2% of the template's range on the grid.
    """

    coefficients: Tuple[float, ...] = DEFAULT_COEFFICIENTS
    grid: Tuple[float, ...] = tuple(np.linspace(-1.0, 1.0, 11))
    modes: Tuple[str, ...] = ("generalist_specialist", "horizontal_shift", "vertical_shift")
    laws: Dict[str, Law] = field(default_factory=dict)
    noise_sd: Optional[float] = None
    n: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidModel(f"synthetic study needs n >= 1, got {self.n}")
        if self.noise_sd is not None and self.noise_sd < 0:
            raise InvalidModel(f"noise_sd must be >= 0, got {self.noise_sd}")
        for name, law in self.laws.items():
            if law[0] not in ("uniform", "normal"):
                raise InvalidModel(f"law for {name} must be uniform or normal, got {law[0]!r}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any], seed: Optional[int] = None) -> "SyntheticSpec":
        values = dict(data)
        for key in ("coefficients", "grid", "modes"):
            if key in values:
                values[key] = tuple(values[key])
        if "laws" in values:
            values["laws"] = {name: tuple(law) for name, law in values["laws"].items()}
        if seed is not None:
            values["seed"] = seed
        return cls(**values)

    def model(self) -> ShapeModel:
        return ShapeModel(
            tuple(ModeSpec.from_key(key) for key in self.modes),
            PolynomialTemplate(self.coefficients),
            SamplingGrid(self.grid),
        )

    def template_range(self) -> float:
        model = self.model()
        values = model.template(model.grid.t)
        return float(np.max(values) - np.min(values))


@dataclass(frozen=True, eq=False)
class SimulationResult:
    grid: SamplingGrid
    curves: List[SampledCurve]
    thetas: np.ndarray
    truth: FitResult
    oracle: Decomposition

    def __iter__(self):
        return iter((self.grid, self.curves, self.oracle))


def _draw(rng: np.random.Generator, law: Law, n: int, positive: bool) -> np.ndarray:
    kind, a, b = law
    values = rng.uniform(a, b, n) if kind == "uniform" else rng.normal(a, b, n)
    if positive:
        bad = values < W_FLOOR
        for _ in range(1000):
            if not bad.any():
                break
            values[bad] = rng.uniform(a, b, bad.sum()) if kind == "uniform" else rng.normal(a, b, bad.sum())
            bad = values < W_FLOOR
        if bad.any():
            raise InvalidModel(f"law {law} puts almost no mass on w >= {W_FLOOR}")
    return values


def true_fit(model: ShapeModel, thetas: np.ndarray, ids: Sequence[str], sse: np.ndarray) -> FitResult:
    """The generating parameters as a FitResult, in the normalized gauge."""
    n = len(ids)
    truth = FitResult(model, tuple(ids), np.ones(n), thetas, sse, 0, True, (1,) * n)
    return normalize_identifiability(truth)


def simulate(spec: SyntheticSpec, pipeline_cfg: Optional[PipelineConfig] = None) -> SimulationResult:
    """Draw theta_i, emit z_i = R(theta_i, t) + noise, and decompose the truth.

    The oracle decomposition uses the noiseless points (normalized like a
    fit) with the realized noise energy as its SSE, under the same metric
    stack as the pipeline.
    """
    model = spec.model()
    rng = np.random.default_rng(spec.seed)
    laws = dict(default_laws(model.modes, model.grid, spec.template_range()))
    laws.update(spec.laws)
    thetas = np.column_stack(
        [
            _draw(rng, laws[mode.name], spec.n, mode.kind is ModeKind.GENERALIST_SPECIALIST) / mode.scale
            for mode in model.modes
        ]
    )
    sd = NOISE_SHARE * spec.template_range() if spec.noise_sd is None else spec.noise_sd
    noise = rng.normal(0.0, sd, (spec.n, model.grid.d)) if sd > 0 else np.zeros((spec.n, model.grid.d))
    z = model.evaluate(thetas) + noise
    ids = [f"c{i + 1:03d}" for i in range(spec.n)]
    curves = [SampledCurve(cid, row) for cid, row in zip(ids, z)]

    cfg = pipeline_cfg or PipelineConfig(modes=model.modes)
    truth = true_fit(model, thetas, ids, np.sum(noise**2, axis=1))
    oracle = decompose_fit(truth, cfg)
    logger.info("simulated %d curves, noise sd %.4g, oracle RSS %s", spec.n, sd, oracle.rss_per_mode)
    return SimulationResult(model.grid, curves, thetas, truth, oracle)
