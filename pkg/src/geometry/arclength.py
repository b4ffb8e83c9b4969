"""Arc length along one-parameter mode curves of the space of variation.

The reference integrator is adaptive Simpson with interval halving and
Richardson correction.  It runs breadth-first over a whole batch of
integrals so that each refinement level is a single vectorised evaluation of
the model velocity.  The polyline integrator sums chord lengths over a
uniform partition and serves as cross-check and as the integrator for
non-smooth custom modes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import NonConvergent
from ..model.surface import ShapeModel, ThetaLike, theta_rows

logger = logging.getLogger(__name__)

# Speed callback: (parameter values (N,), owning integral index (N,)) -> (N,)
SpeedFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

INITIAL_PANELS = 8
MAX_ACTIVE_INTERVALS = 2_000_000


@dataclass(frozen=True)
class ArcConfig:
    quadrature_rel_tol: float = 1e-9
    quadrature_max_depth: int = 40
    polyline_segments: int = 4096

    def __post_init__(self) -> None:
        if not self.quadrature_rel_tol > 0:
            raise ValueError(f"quadrature_rel_tol must be positive, got {self.quadrature_rel_tol}")
        if self.quadrature_max_depth < 1:
            raise ValueError(f"quadrature_max_depth must be >= 1, got {self.quadrature_max_depth}")
        if self.polyline_segments < 2:
            raise ValueError(f"polyline_segments must be >= 2, got {self.polyline_segments}")


def integrate_batch(speed: SpeedFn, lo: np.ndarray, hi: np.ndarray, rel_tol: float, max_depth: int) -> np.ndarray:
    """Integrals of speed_j over [lo_j, hi_j] for every j, lo_j <= hi_j."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    count = lo.size
    result = np.zeros(count)
    if count == 0:
        return result

    frac = np.linspace(0.0, 1.0, 2 * INITIAL_PANELS + 1)
    nodes = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
    owners = np.repeat(np.arange(count), frac.size)
    fvals = _evaluate(speed, nodes.ravel(), owners).reshape(nodes.shape)

    a, b = nodes[:, 0:-1:2], nodes[:, 2::2]
    fa, fm, fb = fvals[:, 0:-1:2], fvals[:, 1::2], fvals[:, 2::2]
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = np.abs(whole.sum(axis=1))
    tol = np.repeat((rel_tol * scale / INITIAL_PANELS)[:, None], INITIAL_PANELS, axis=1)
    owner = np.repeat(np.arange(count)[:, None], INITIAL_PANELS, axis=1)

    a, b, fa, fm, fb = a.ravel(), b.ravel(), fa.ravel(), fm.ravel(), fb.ravel()
    whole, tol, owner = whole.ravel(), tol.ravel(), owner.ravel()

    depth = 0
    while a.size:
        mid = 0.5 * (a + b)
        both = _evaluate(speed, np.concatenate([0.5 * (a + mid), 0.5 * (mid + b)]), np.concatenate([owner, owner]))
        flm, frm = both[: a.size], both[a.size:]
        left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        done = np.abs(delta) <= 15.0 * tol
        np.add.at(result, owner[done], (left + right + delta / 15.0)[done])

        keep = ~done
        if not keep.any():
            break
        depth += 1
        if depth >= max_depth:
            raise NonConvergent(f"adaptive Simpson exceeded depth {max_depth} on {int(keep.sum())} intervals")
        if 2 * int(keep.sum()) > MAX_ACTIVE_INTERVALS:
            raise NonConvergent("adaptive Simpson refinement exploded; speed function is pathological")
        a, b = np.concatenate([a[keep], mid[keep]]), np.concatenate([mid[keep], b[keep]])
        fa, fm, fb = (
            np.concatenate([fa[keep], fm[keep]]),
            np.concatenate([flm[keep], frm[keep]]),
            np.concatenate([fm[keep], fb[keep]]),
        )
        whole = np.concatenate([left[keep], right[keep]])
        tol = np.concatenate([tol[keep], tol[keep]]) / 2.0
        owner = np.concatenate([owner[keep], owner[keep]])
    return result


def _evaluate(speed: SpeedFn, s: np.ndarray, owner: np.ndarray) -> np.ndarray:
    values = np.asarray(speed(s, owner), dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonConvergent("speed function returned non-finite values")
    return values


def mode_speed(model: ShapeModel, k: int, rows: np.ndarray) -> SpeedFn:
    """Speed ||dR/dtheta_k|| along mode k, other components taken from rows[owner]."""

    def speed(s: np.ndarray, owner: np.ndarray) -> np.ndarray:
        points = rows[owner].copy()
        points[:, k] = s
        return np.linalg.norm(model.velocity(points, k, check=False), axis=1)

    return speed


def _polyline_lengths(model: ShapeModel, k: int, lo: np.ndarray, hi: np.ndarray, rows: np.ndarray, n_segments: int) -> np.ndarray:
    frac = np.linspace(0.0, 1.0, n_segments + 1)
    lengths = np.empty(lo.size)
    chunk = max(1, 200_000 // (n_segments + 1))
    for start in range(0, lo.size, chunk):
        stop = min(lo.size, start + chunk)
        s = lo[start:stop, None] + (hi - lo)[start:stop, None] * frac[None, :]
        points = np.repeat(rows[start:stop], frac.size, axis=0)
        points[:, k] = s.ravel()
        images = model.evaluate(points, check=False).reshape(stop - start, frac.size, -1)
        lengths[start:stop] = np.linalg.norm(np.diff(images, axis=1), axis=2).sum(axis=1)
    return lengths


def signed_arcs(
    model: ShapeModel,
    k: int,
    start: np.ndarray,
    end: np.ndarray,
    rows: np.ndarray,
    cfg: Optional[ArcConfig] = None,
) -> np.ndarray:
    """Signed arc length from start_j to end_j along mode k through rows[j]."""
    cfg = cfg or ArcConfig()
    start = np.broadcast_to(np.asarray(start, dtype=float), (rows.shape[0],))
    end = np.broadcast_to(np.asarray(end, dtype=float), (rows.shape[0],))
    lo, hi = np.minimum(start, end), np.maximum(start, end)
    if model.modes[k].smooth:
        lengths = integrate_batch(
            mode_speed(model, k, rows), lo, hi, cfg.quadrature_rel_tol, cfg.quadrature_max_depth
        )
    else:
        logger.debug("polyline arc lengths for non-smooth mode %s", model.modes[k].name)
        lengths = _polyline_lengths(model, k, lo, hi, rows, cfg.polyline_segments)
    return np.sign(end - start) * lengths


def arcdist(model: ShapeModel, k: int, a: float, b: float, fixed: ThetaLike, cfg: Optional[ArcConfig] = None) -> float:
    """Length of the mode-k curve between theta_k = a and theta_k = b."""
    rows, _ = theta_rows(fixed)
    return float(abs(signed_arcs(model, k, np.array([a]), np.array([b]), rows[:1], cfg)[0]))


def arcdist_polyline(model: ShapeModel, k: int, a: float, b: float, fixed: ThetaLike, n_segments: int) -> float:
    """Sum of chord lengths over n_segments uniform pieces of [a, b]."""
    if n_segments < 1:
        raise ValueError(f"n_segments must be >= 1, got {n_segments}")
    rows, _ = theta_rows(fixed)
    lo, hi = np.array([min(a, b)]), np.array([max(a, b)])
    return float(_polyline_lengths(model, k, lo, hi, rows[:1], n_segments)[0])


def arc_coordinate(
    model: ShapeModel, k: int, theta_k: float, origin_k: float, fixed: ThetaLike, cfg: Optional[ArcConfig] = None
) -> float:
    """sign(theta_k - origin_k) * arcdist(origin_k, theta_k)."""
    rows, _ = theta_rows(fixed)
    return float(signed_arcs(model, k, np.array([origin_k]), np.array([theta_k]), rows[:1], cfg)[0])


def arc_coordinates(
    model: ShapeModel, k: int, values: np.ndarray, origin_k: float, rows: np.ndarray, cfg: Optional[ArcConfig] = None
) -> np.ndarray:
    """Batched arc_coordinate: values[j] measured through rows[j]."""
    return signed_arcs(model, k, np.full(len(values), float(origin_k)), np.asarray(values, dtype=float), rows, cfg)
