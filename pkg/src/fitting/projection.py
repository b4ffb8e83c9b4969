"""Projection of one observed curve onto the space of variation.

Each start runs Levenberg-Marquardt (scipy's MINPACK wrapper) on the
residual z - R(theta, t) with the analytic Jacobian of the model.
"""
from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial.distance import cdist
from scipy.stats import qmc

from ..errors import InvalidModel, NoConvergence
from ..model.design import SampledCurve, SamplingGrid, response_matrix
from ..model.modes import ModeKind, ModeSpec, ThetaVector
from ..model.surface import ShapeModel, ThetaLike, theta_rows
from ..model.template import PolynomialTemplate

logger = logging.getLogger(__name__)

MAX_NFEV = 200
LM_TOL = 1e-14
SAME_SSE_REL = 1e-8
DISTINCT_THETA = 1e-3


def _solve(model: ShapeModel, z: np.ndarray, x0: np.ndarray, max_nfev: int) -> Optional[Tuple[np.ndarray, float]]:
    def residual(theta: np.ndarray) -> np.ndarray:
        return z - model.evaluate(theta, check=False)

    def jacobian(theta: np.ndarray) -> np.ndarray:
        return -model.jacobian(theta, check=False)

    try:
        with np.errstate(over="ignore", invalid="ignore"):
            res = least_squares(
                residual, x0, jac=jacobian, method="lm",
                xtol=LM_TOL, ftol=LM_TOL, gtol=LM_TOL, max_nfev=max_nfev,
            )
    except (ValueError, np.linalg.LinAlgError) as exc:
        logger.debug("LM start %s failed: %s", x0.tolist(), exc)
        return None
    if res.status <= 0 or not np.all(np.isfinite(res.x)) or not np.all(np.isfinite(res.fun)):
        return None
    k = model.index_of(ModeKind.GENERALIST_SPECIALIST)
    if k is not None and res.x[k] * model.modes[k].scale <= 0:
        return None
    return res.x, float(res.fun @ res.fun)


def count_minima(solutions: Sequence[Tuple[np.ndarray, float]]) -> int:
    """Distinct parameter vectors among solutions tied with the best SSE."""
    best = min(sse for _, sse in solutions)
    cutoff = best + SAME_SSE_REL * max(best, 1e-12)
    distinct: List[np.ndarray] = []
    for theta, sse in solutions:
        if sse <= cutoff and all(np.linalg.norm(theta - seen) > DISTINCT_THETA for seen in distinct):
            distinct.append(theta)
    return len(distinct)


def project_model(
    model: ShapeModel, z: np.ndarray, inits: Sequence[ThetaLike], max_nfev: int = MAX_NFEV
) -> Tuple[np.ndarray, float, int]:
    """(theta_hat, sse, n_minima) for one response vector."""
    if not len(inits):
        raise ValueError("project_curve needs at least one initial value")
    if model.grid.d < model.p:
        raise InvalidModel(f"{model.p} modes cannot be fitted from {model.grid.d} grid points")
    solutions = []
    for init in inits:
        x0, _ = theta_rows(init)
        found = _solve(model, np.asarray(z, dtype=float), x0[0].astype(float), max_nfev)
        if found is not None:
            solutions.append(found)
    if not solutions:
        raise NoConvergence(f"all {len(inits)} Levenberg-Marquardt starts failed")
    theta, sse = min(solutions, key=lambda item: item[1])
    return theta, sse, count_minima(solutions)


def project_curve(
    curve: SampledCurve,
    template: PolynomialTemplate,
    modes: Sequence[ModeSpec],
    inits: Sequence[ThetaLike],
    grid: SamplingGrid,
    max_nfev: int = MAX_NFEV,
) -> Tuple[ThetaVector, float, int]:
    """Closest point of the space of variation to the curve, over several starts.

    Returns the lowest-SSE solution, its SSE and the number of distinct
    minimisers that reach that SSE.
    """
    model = ShapeModel(tuple(modes), template, grid)
    theta, sse, n_minima = project_model(model, curve.z, inits, max_nfev)
    return model.theta(theta), sse, n_minima


def default_start_box(model: ShapeModel, z: np.ndarray, center: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Latin-hypercube box around ``center``: w x[0.7, 1.4], m +/-20% of the grid span,
    h +/-20% of the response range, custom parameters +/-1."""
    z_range = max(float(np.ptp(z)), 1e-8)
    lo, hi = np.empty(model.p), np.empty(model.p)
    for k, mode in enumerate(model.modes):
        c = center[k] * mode.scale
        if mode.kind is ModeKind.GENERALIST_SPECIALIST:
            a, b = 0.7 * c, 1.4 * c
        elif mode.kind is ModeKind.HORIZONTAL_SHIFT:
            a, b = c - 0.2 * model.grid.span, c + 0.2 * model.grid.span
        elif mode.kind is ModeKind.VERTICAL_SHIFT:
            a, b = c - 0.2 * z_range, c + 0.2 * z_range
        else:
            a, b = c - 1.0, c + 1.0
        lo[k], hi[k] = sorted((a / mode.scale, b / mode.scale))
    return lo, hi


def latin_starts(model: ShapeModel, z: np.ndarray, center: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    if n <= 0:
        return np.empty((0, model.p))
    lo, hi = default_start_box(model, z, center)
    unit = qmc.LatinHypercube(d=model.p, seed=rng).random(n)
    return qmc.scale(unit, lo, hi) if np.all(hi > lo) else np.repeat(center[None, :], n, axis=0)


def neighbor_seed(curves: Sequence[SampledCurve], current_thetas: np.ndarray) -> List[List[np.ndarray]]:
    """Per curve: its own previous theta and that of its nearest curve in raw-data distance."""
    thetas = np.atleast_2d(np.asarray(current_thetas, dtype=float))
    if len(curves) != thetas.shape[0]:
        raise ValueError(f"{len(curves)} curves but {thetas.shape[0]} parameter vectors")
    if len(curves) == 1:
        return [[thetas[0].copy()]]
    distances = cdist(response_matrix(curves), response_matrix(curves))
    np.fill_diagonal(distances, np.inf)
    nearest = np.argmin(distances, axis=1)
    return [[thetas[i].copy(), thetas[j].copy()] for i, j in enumerate(nearest)]
