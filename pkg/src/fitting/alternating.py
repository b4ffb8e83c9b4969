"""Alternating estimation of the polynomial template and per-curve parameters.

Step 1 solves a weighted linear least-squares problem for the template
coefficients with every theta_i held fixed; step 2 projects every curve on
the current space of variation.  After each outer iteration the
identifiability gauges are fixed exactly, which leaves every fitted curve
unchanged.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from ..errors import InvalidModel, NoConvergence
from ..model.design import SampledCurve, SamplingGrid, check_curves, curve_ids, response_matrix, weight_vector
from ..model.modes import ModeKind, ModeSpec
from ..model.surface import ShapeModel
from ..model.template import PolynomialTemplate
from .projection import MAX_NFEV, latin_starts, neighbor_seed, project_model
from .result import FitResult

logger = logging.getLogger(__name__)


def default_modes() -> List[ModeSpec]:
    """(w, m, h): generalist-specialist, horizontal shift, vertical shift."""
    return [ModeSpec.generalist_specialist(), ModeSpec.horizontal_shift(), ModeSpec.vertical_shift()]


@dataclass(frozen=True)
class FitConfig:
    degree: int = 4
    max_outer_iters: int = 100
    rel_tol: float = 1e-8
    abs_tol: float = 1e-24
    multistart: int = 7
    max_nfev: int = MAX_NFEV
    seed: int = 0

    def __post_init__(self) -> None:
        if self.degree < 2:
            raise InvalidModel(f"template degree must be >= 2, got {self.degree}")
        if self.max_outer_iters < 1:
            raise ValueError(f"max_outer_iters must be >= 1, got {self.max_outer_iters}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.multistart < 1:
            raise ValueError(f"multistart must be >= 1, got {self.multistart}")


def _canonical(model: ShapeModel, thetas: np.ndarray, kind: ModeKind) -> Optional[np.ndarray]:
    k = model.index_of(kind)
    return None if k is None else thetas[:, k] * model.modes[k].scale


def custom_terms(model: ShapeModel, thetas: np.ndarray) -> np.ndarray:
    total = np.zeros((thetas.shape[0], model.grid.d))
    for k, mode in enumerate(model.modes):
        if mode.kind is ModeKind.CUSTOM:
            total += np.asarray(mode.warp(thetas[:, k] * mode.scale, model.grid.t), dtype=float)
    return total


def fit_template(
    model: ShapeModel, z: np.ndarray, weights: np.ndarray, thetas: np.ndarray, degree: int
) -> PolynomialTemplate:
    """Weighted least-squares template coefficients given every theta_i."""
    n, d = z.shape
    w = _canonical(model, thetas, ModeKind.GENERALIST_SPECIALIST)
    w = np.ones(n) if w is None else w
    m = _canonical(model, thetas, ModeKind.HORIZONTAL_SHIFT)
    m = np.zeros(n) if m is None else m
    h = _canonical(model, thetas, ModeKind.VERTICAL_SHIFT)
    h = np.zeros(n) if h is None else h

    u = w[:, None] * (model.grid.t[None, :] - m[:, None])
    root = np.sqrt(weights)[:, None]
    design = (root * w[:, None])[:, :, None] * np.power(u[:, :, None], np.arange(degree + 1))
    target = root * (z - h[:, None] - custom_terms(model, thetas))
    coef, *_ = np.linalg.lstsq(design.reshape(n * d, degree + 1), target.ravel(), rcond=None)
    return PolynomialTemplate(tuple(coef))


def normalize_identifiability(fit: FitResult) -> FitResult:
    """Fix the w, m and h gauges, absorbing each into the template.

    w: weighted geometric mean 1, template u -> g z(g u).
    m: weighted mean 0, template u -> z(u - c) with m -> m - c / w.
    h: weighted mean 0, template z + b with h -> h - w b.
    """
    model, thetas, omega = fit.model, fit.thetas.copy(), fit.weights
    template = model.template
    kw = model.index_of(ModeKind.GENERALIST_SPECIALIST)
    km = model.index_of(ModeKind.HORIZONTAL_SHIFT)
    kh = model.index_of(ModeKind.VERTICAL_SHIFT)

    w = np.ones(fit.n) if kw is None else thetas[:, kw] * model.modes[kw].scale
    if kw is not None:
        g = float(np.exp(np.sum(omega * np.log(w)) / np.sum(omega)))
        w = w / g
        thetas[:, kw] = w / model.modes[kw].scale
        template = template.rescaled(g)
    if km is not None:
        m = thetas[:, km] * model.modes[km].scale
        c = float(np.sum(omega * m) / np.sum(omega / w))
        thetas[:, km] = (m - c / w) / model.modes[km].scale
        template = template.shifted(c)
    if kh is not None:
        h = thetas[:, kh] * model.modes[kh].scale
        b = float(np.sum(omega * h) / np.sum(omega * w))
        thetas[:, kh] = (h - w * b) / model.modes[kh].scale
        template = template.raised(b)
    return fit.with_values(model=model.with_template(template), thetas=thetas)


def _step2(
    model: ShapeModel,
    curves: Sequence[SampledCurve],
    thetas: np.ndarray,
    sse: np.ndarray,
    cfg: FitConfig,
    iteration: int,
    full: bool,
):
    seeds = neighbor_seed(curves, thetas)
    new_thetas, new_sse, minima = thetas.copy(), sse.copy(), []
    for i, curve in enumerate(curves):
        inits = list(seeds[i])[: cfg.multistart]
        if full:
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, iteration, i]))
            inits += list(latin_starts(model, curve.z, thetas[i], cfg.multistart - len(inits), rng))
        try:
            theta, value, n_minima = project_model(model, curve.z, inits, cfg.max_nfev)
        except NoConvergence:
            logger.warning("projection of curve %s failed from every start; keeping previous parameters", curve.id)
            minima.append(0)
            continue
        minima.append(n_minima)
        if value <= sse[i]:
            new_thetas[i], new_sse[i] = theta, value
    return new_thetas, new_sse, minima


def fit_all(
    curves: Sequence[SampledCurve],
    grid: SamplingGrid,
    degree: Optional[int] = None,
    config: Optional[FitConfig] = None,
    modes: Optional[Sequence[ModeSpec]] = None,
    inits: Optional[np.ndarray] = None,
) -> FitResult:
    """Alternating fit of template and parameters.

    Every curve gets the full multistart (previous theta, neighbour seed and
    Latin-hypercube draws) at the first iteration and once more when the
    fit looks converged; in between only the previous theta and the
    neighbour seed are tried.
    """
    cfg = config or FitConfig()
    if degree is not None and degree != cfg.degree:
        cfg = replace(cfg, degree=degree)
    curves = list(curves)
    if len(curves) < 2:
        raise ValueError(f"fitting needs at least 2 curves, got {len(curves)}")
    check_curves(grid, curves)
    modes = tuple(modes or default_modes())
    z, omega = response_matrix(curves), weight_vector(curves)

    seed_model = ShapeModel(modes, PolynomialTemplate((0.0, 0.0, 1.0)), grid)
    thetas = np.repeat(seed_model.identity()[None, :], len(curves), axis=0) if inits is None else np.array(inits, dtype=float)
    model = seed_model.with_template(fit_template(seed_model, z, omega, thetas, cfg.degree))
    sse = np.sum((z - model.evaluate(thetas)) ** 2, axis=1)
    fit = FitResult(model, curve_ids(curves), omega, thetas, sse, 0, False, (1,) * len(curves), (float(omega @ sse),))

    full, polishing = True, False
    for iteration in range(1, cfg.max_outer_iters + 1):
        previous = fit.total_sse
        thetas, sse, minima = _step2(fit.model, curves, fit.thetas, fit.sse, cfg, iteration, full)
        model = fit.model.with_template(fit_template(fit.model, z, omega, thetas, cfg.degree))
        sse = np.sum((z - model.evaluate(thetas)) ** 2, axis=1)
        candidate = fit.with_values(model=model, thetas=thetas, sse=sse, iterations=iteration, multistart_report=minima)
        if candidate.total_sse <= previous:
            fit = normalize_identifiability(candidate)
        else:
            fit = fit.with_values(iterations=iteration, multistart_report=minima)
        fit = fit.with_values(sse_trace=fit.sse_trace + (fit.total_sse,))
        logger.info("outer iteration %d: weighted SSE %.10g", iteration, fit.total_sse)

        settled = previous - fit.total_sse <= cfg.rel_tol * previous or fit.total_sse <= cfg.abs_tol
        if settled and (polishing or cfg.multistart <= 2):
            return fit.with_values(converged=True)
        polishing = settled
        full = settled
    raise NoConvergence(f"fit did not converge in {cfg.max_outer_iters} outer iterations", fit=fit)
