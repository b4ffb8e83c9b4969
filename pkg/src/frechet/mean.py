"""Fréchet function, mean and variance on the space of variation.

Under a CompositeMetric every squared distance is a squared Euclidean
distance between embeddings, so for a candidate R

    F_n(R) = sum_i ||E_i - E_bar||^2 + n ||E_bar - E(R)||^2.

The mean search therefore minimises ||E(R) - E_bar||^2 block by block:
singleton blocks invert their arc-coordinate map, two-mode blocks use a
grid scan followed by bounded Nelder-Mead.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import bisect, minimize

from ..errors import NonInvertible, SearchBoxTooSmall
from ..metrics.distances import CompositeMetric
from ..model.modes import ThetaVector
from ..model.surface import ManifoldPoint, ThetaLike, theta_rows
from .grid import OriginGrid, expanded_interval

logger = logging.getLogger(__name__)

Sample = Union[Sequence[ManifoldPoint], Sequence[ThetaVector], np.ndarray]

SCAN_RESOLUTION = 11
REFINE_STARTS = 5
UNIQUE_SPREAD = 1e-6
BISECT_XTOL = 1e-13
BOUNDARY_FRACTION = 1e-6
ZOOM_ROUNDS = 3


@dataclass(frozen=True)
class FrechetResult:
    mean_theta: ThetaVector
    variance: float
    attained_value: float
    ssm_by_mode: Dict[str, float] = field(default_factory=dict)
    search_diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.search_diagnostics.get("n", 0))


def sample_rows(sample: Sample) -> np.ndarray:
    """(n, p) parameter rows from ManifoldPoints, ThetaVectors or an array."""
    if isinstance(sample, np.ndarray):
        rows = np.atleast_2d(sample.astype(float))
    else:
        items = list(sample)
        if items and isinstance(items[0], ManifoldPoint):
            items = [point.theta for point in items]
        rows = np.array([theta_rows(item)[0][0] for item in items], dtype=float)
    if rows.size == 0:
        raise ValueError("Fréchet computations need a nonempty sample")
    return rows


def frechet_fn(sample: Sample, candidate: ThetaLike, metric: CompositeMetric) -> float:
    """sum_i d^2(R_i, R(candidate))."""
    rows = sample_rows(sample)
    cand, _ = theta_rows(candidate)
    embedded = metric.embed(np.vstack([rows, cand[:1]]))
    return float(np.sum((embedded[:-1] - embedded[-1]) ** 2))


def _per_mode(metric: CompositeMetric, residuals: np.ndarray) -> Dict[str, float]:
    totals = np.zeros(metric.model.p)
    np.add.at(totals, np.asarray(metric.columns), np.sum(residuals**2, axis=0))
    return {metric.model.modes[k].key: float(v) for k, v in enumerate(totals)}


def _singleton_mean(metric: CompositeMetric, b: int, rows: np.ndarray) -> Tuple[float, Dict[str, Any]]:
    (k,) = metric.decl.blocks[b]
    coords = metric.embed_block(b, rows)[:, 0]
    target = float(np.mean(coords))
    lo, hi = float(np.min(rows[:, k])), float(np.max(rows[:, k]))
    if lo == hi:
        return lo, {"bisect_iterations": 0}
    base = metric.origin[None, :].copy()

    def coordinate(x: float) -> float:
        point = base.copy()
        point[0, k] = x
        return float(metric.embed_block(b, point)[0, 0])

    c_lo, c_hi = coordinate(lo), coordinate(hi)
    if not c_lo < c_hi:
        raise NonInvertible(
            f"arc coordinate of {metric.model.names[k]} is flat on [{lo:.6g}, {hi:.6g}]"
        )
    if target <= c_lo:
        return lo, {"bisect_iterations": 0}
    if target >= c_hi:
        return hi, {"bisect_iterations": 0}
    root, info = bisect(lambda x: coordinate(x) - target, lo, hi, xtol=BISECT_XTOL, full_output=True)
    delta = 1e-6 * (hi - lo)
    if not coordinate(root - delta) < coordinate(root + delta):
        raise NonInvertible(
            f"arc coordinate of {metric.model.names[k]} is flat around {root:.6g}; the mean is not unique"
        )
    return float(root), {"bisect_iterations": int(info.iterations)}


def _block_points(metric: CompositeMetric, block: Tuple[int, ...], xy: np.ndarray) -> np.ndarray:
    xy = np.atleast_2d(xy)
    out = np.repeat(metric.origin[None, :], xy.shape[0], axis=0)
    out[:, list(block)] = xy
    return out


def _scan(metric: CompositeMetric, b: int, target: np.ndarray, box) -> Tuple[np.ndarray, np.ndarray]:
    """SCAN_RESOLUTION^2 grid over ``box`` and the squared image distance to ``target`` at each point."""
    (a_lo, a_hi), (b_lo, b_hi) = box
    ga, gb = np.meshgrid(np.linspace(a_lo, a_hi, SCAN_RESOLUTION), np.linspace(b_lo, b_hi, SCAN_RESOLUTION), indexing="ij")
    scan = np.column_stack([ga.ravel(), gb.ravel()])
    images = metric.embed_block(b, _block_points(metric, metric.decl.blocks[b], scan))
    return scan, np.sum((images - target) ** 2, axis=1)


def _zoomed_scan(metric: CompositeMetric, b: int, target: np.ndarray, box) -> Tuple[np.ndarray, float]:
    """Best point of a grid scan refined by ZOOM_ROUNDS scans of the cells around it."""
    scan, values = _scan(metric, b, target, box)
    i = int(np.argmin(values))
    best, best_value = scan[i], float(values[i])
    for _ in range(ZOOM_ROUNDS):
        box = tuple(
            (max(lo, x - (hi - lo) / (SCAN_RESOLUTION - 1)), min(hi, x + (hi - lo) / (SCAN_RESOLUTION - 1)))
            for (lo, hi), x in zip(box, best)
        )
        scan, values = _scan(metric, b, target, box)
        i = int(np.argmin(values))
        if values[i] < best_value:
            best, best_value = scan[i], float(values[i])
    return best, best_value


def _pair_mean(
    metric: CompositeMetric, b: int, rows: np.ndarray, box: Tuple[Tuple[float, float], Tuple[float, float]], starts: int
) -> Tuple[np.ndarray, Dict[str, Any]]:
    block = metric.decl.blocks[b]
    ia, ib = block
    target = metric.embed_block(b, rows).mean(axis=0)
    if np.all(rows[:, [ia, ib]] == rows[0, [ia, ib]]):
        return rows[0, [ia, ib]].copy(), {"scan_points": 0, "starts": 0, "nfev": 0, "argmin_spread": 0.0, "unique": True}

    def objective(xy: np.ndarray) -> float:
        return float(np.sum((metric.embed_block(b, _block_points(metric, block, xy))[0] - target) ** 2))

    (a_lo, a_hi), (b_lo, b_hi) = box
    scan, scan_values = _scan(metric, b, target, box)
    order = np.lexsort((scan[:, 1], scan[:, 0], scan_values))[:starts]

    results = []
    nfev = 0
    for idx in order:
        res = minimize(
            objective,
            scan[idx],
            method="Nelder-Mead",
            bounds=[(a_lo, a_hi), (b_lo, b_hi)],
            options={"xatol": 1e-11, "fatol": 1e-15, "maxiter": 2000},
        )
        nfev += int(res.nfev)
        results.append((float(res.fun), tuple(res.x)))
    results.sort()
    best_value, best = results[0]
    best = np.array(best)

    near = [np.array(x) for value, x in results if value <= best_value + 1e-9 * max(1.0, best_value)]
    images = metric.embed_block(b, _block_points(metric, block, np.array(near)))
    spread = float(np.max(np.linalg.norm(images[:, None, :] - images[None, :, :], axis=2))) if len(near) > 1 else 0.0

    widths = np.array([a_hi - a_lo, b_hi - b_lo])
    gap = np.minimum(best - np.array([a_lo, b_lo]), np.array([a_hi, b_hi]) - best)
    if np.any(gap <= BOUNDARY_FRACTION * widths):
        raise SearchBoxTooSmall(
            f"Fréchet mean of ({metric.model.names[ia]}, {metric.model.names[ib]}) sits on the search box "
            f"boundary at {best.tolist()}",
            theta=best,
        )
    diagnostics = {
        "scan_points": int(scan.shape[0]),
        "starts": len(results),
        "nfev": nfev,
        "value_spread": float(results[-1][0] - best_value),
        "argmin_spread": spread,
        "unique": spread < UNIQUE_SPREAD,
    }
    return best, diagnostics


def _finish(metric: CompositeMetric, rows: np.ndarray, mean: np.ndarray, diagnostics: Dict[str, Any]) -> FrechetResult:
    embedded = metric.embed(np.vstack([rows, mean[None, :]]))
    residuals = embedded[:-1] - embedded[-1]
    attained = float(np.sum(residuals**2))
    n = rows.shape[0]
    diagnostics = dict(diagnostics, n=n)
    return FrechetResult(
        metric.model.theta(mean),
        attained / n,
        attained,
        _per_mode(metric, residuals),
        diagnostics,
    )


def frechet_mean_1d(sample: Sample, k: int, metric: CompositeMetric) -> FrechetResult:
    """Mean along a singleton block: average arc coordinates, then invert.

    Components outside mode k are taken from the metric's origin.
    """
    rows = sample_rows(sample)
    block = metric.decl.blocks.index(metric.decl.block_of(k))
    if len(metric.decl.blocks[block]) != 1:
        raise ValueError(f"mode {metric.model.names[k]} is not a singleton block")
    value, diag = _singleton_mean(metric, block, rows)
    mean = metric.origin.copy()
    mean[k] = value
    projected = np.repeat(metric.origin[None, :], rows.shape[0], axis=0)
    projected[:, k] = rows[:, k]
    return _finish(metric, projected, mean, {metric.model.names[k]: diag})


def _pair_box(metric: CompositeMetric, block: Tuple[int, ...], rows: np.ndarray, search: Optional[OriginGrid]):
    box = []
    for k in block:
        name = metric.model.names[k]
        if search is not None and name in search.names:
            axis = search.axis(name)
            box.append((float(axis[0]), float(axis[-1])))
        else:
            box.append(expanded_interval(metric.model, k, rows[:, k]))
    return tuple(box)


def frechet_mean(
    sample: Sample,
    metric: CompositeMetric,
    search: Optional[OriginGrid] = None,
    starts: int = REFINE_STARTS,
) -> FrechetResult:
    """Element of the Fréchet mean set plus search diagnostics.

    ``search`` may fix the box of any two-mode block parameter; otherwise
    the sample's bounding box widened by 10% is used.
    """
    rows = sample_rows(sample)
    mean = metric.origin.copy()
    diagnostics: Dict[str, Any] = {}
    for b, block in enumerate(metric.decl.blocks):
        label = ",".join(metric.model.names[k] for k in block)
        if len(block) == 1:
            mean[block[0]], diagnostics[label] = _singleton_mean(metric, b, rows)
        else:
            xy, diagnostics[label] = _pair_mean(metric, b, rows, _pair_box(metric, block, rows, search), starts)
            mean[list(block)] = xy
    result = _finish(metric, rows, mean, diagnostics)
    logger.debug("Fréchet mean %s variance %.6g", result.mean_theta.as_dict(), result.variance)
    return result


def screening_variance(sample: Sample, metric: CompositeMetric, search: Optional[OriginGrid] = None) -> float:
    """Fréchet variance from batched evaluations only, for ranking many metrics.

    Singleton blocks are exact: their mean arc coordinate is attained.
    Two-mode blocks stop at a zoomed grid scan, so their part is an upper
    bound that ``frechet_mean`` can only lower.
    """
    rows = sample_rows(sample)
    total = 0.0
    for b, block in enumerate(metric.decl.blocks):
        coords = metric.embed_block(b, rows)
        centre = coords.mean(axis=0)
        total += float(np.sum((coords - centre) ** 2))
        if len(block) == 2 and not np.all(rows[:, list(block)] == rows[0, list(block)]):
            _, gap = _zoomed_scan(metric, b, centre, _pair_box(metric, block, rows, search))
            total += rows.shape[0] * gap
    return total / rows.shape[0]


def frechet_variance(sample: Sample, metric: CompositeMetric, mean: FrechetResult) -> float:
    """F_n at the mean divided by n."""
    rows = sample_rows(sample)
    return frechet_fn(rows, mean.mean_theta, metric) / rows.shape[0]
