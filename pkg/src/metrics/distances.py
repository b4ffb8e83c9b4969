"""Manifold metrics built from one-dimensional arcdistances.

Every metric here is the Euclidean distance between embeddings of the
manifold into R^D: a singleton (separable) block maps to the signed arc
coordinate of its parameter, a two-mode block maps to the two
origin-anchored linearisations L1 and L2 weighted by sqrt(gamma) and
sqrt(1 - gamma).  Distances, Fréchet functions and the per-mode sums of
squares are all read off these coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..errors import NotSeparable, UnsupportedBlockSize
from ..geometry.arclength import ArcConfig, signed_arcs
from ..model.modes import ThetaVector
from ..model.surface import ShapeModel, ThetaLike, theta_rows
from .separability import SeparabilityDecl, check_box, sample_box

EQUALITY_OF_PATH_TOL = 1e-7


@dataclass(frozen=True)
class MetricConfig:
    origin: ThetaVector
    gamma: float = 0.5
    arc: ArcConfig = field(default_factory=ArcConfig)

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")

    def with_origin(self, origin: ThetaVector) -> "MetricConfig":
        return MetricConfig(origin, self.gamma, self.arc)

    def with_gamma(self, gamma: float) -> "MetricConfig":
        return MetricConfig(self.origin, gamma, self.arc)


def c_component(
    model: ShapeModel,
    k: int,
    a: float,
    b: float,
    arc: Optional[ArcConfig] = None,
    seed: int = 0,
    tol: float = EQUALITY_OF_PATH_TOL,
) -> float:
    """Arcdistance along mode k, checked to be independent of the other parameters."""
    anchors = sample_box(model, check_box(model), 3, np.random.default_rng(seed))
    lengths = np.abs(signed_arcs(model, k, np.full(3, float(a)), np.full(3, float(b)), anchors, arc))
    spread = float(lengths.max() - lengths.min())
    if spread > tol * max(1.0, float(lengths.max())):
        raise NotSeparable(
            f"arcdistance along {model.names[k]} depends on the other parameters (spread {spread:.3g})"
        )
    return float(lengths[0])


def dist_separable(
    model: ShapeModel, theta1: ThetaLike, theta2: ThetaLike, decl: SeparabilityDecl, arc: Optional[ArcConfig] = None
) -> float:
    """sqrt(sum_k C_k^2) for a model whose blocks are all singletons."""
    decl.check_partition(model.p)
    if not decl.all_singletons:
        raise NotSeparable(f"dist_separable needs singleton blocks, got {decl.blocks}")
    x, _ = theta_rows(theta1)
    y, _ = theta_rows(theta2)
    squares = [c_component(model, k, x[0, k], y[0, k], arc) ** 2 for k in range(model.p)]
    return float(np.sqrt(np.sum(squares)))


def _origin_rows(origin: ThetaLike, n: int) -> np.ndarray:
    rows, _ = theta_rows(origin)
    return np.repeat(rows[:1], n, axis=0)


def pair_images(
    model: ShapeModel,
    thetas: np.ndarray,
    origin: ThetaLike,
    pair: Tuple[int, int],
    arc: Optional[ArcConfig] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """L1,O and L2,O images, each (N, 2), of parameter rows for the mode pair.

    L1 measures both coordinates along the curves through the origin; L2
    measures each coordinate along the curve through the point itself.
    Parameters outside the pair are held at the origin's values.
    """
    ia, ib = pair
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    n = thetas.shape[0]
    base = _origin_rows(origin, n)
    o = base[0]

    along_a = np.vstack([base, base])
    along_a[n:, ib] = thetas[:, ib]
    eta = signed_arcs(model, ia, np.full(2 * n, o[ia]), np.tile(thetas[:, ia], 2), along_a, arc)

    along_b = np.vstack([base, base])
    along_b[n:, ia] = thetas[:, ia]
    zeta = signed_arcs(model, ib, np.full(2 * n, o[ib]), np.tile(thetas[:, ib], 2), along_b, arc)

    l1 = np.column_stack([eta[:n], zeta[:n]])
    l2 = np.column_stack([eta[n:], zeta[n:]])
    return l1, l2


def _default_pair(model: ShapeModel, pair: Optional[Tuple[int, int]]) -> Tuple[int, int]:
    if pair is not None:
        return pair
    if model.p != 2:
        raise ValueError(f"model has {model.p} modes; name the mode pair explicitly")
    return (0, 1)


def _pair_distances(
    model: ShapeModel, theta1: ThetaLike, theta2: ThetaLike, cfg: MetricConfig, pair: Optional[Tuple[int, int]]
) -> Tuple[float, float]:
    x, _ = theta_rows(theta1)
    y, _ = theta_rows(theta2)
    l1, l2 = pair_images(model, np.vstack([x[:1], y[:1]]), cfg.origin, _default_pair(model, pair), cfg.arc)
    return float(np.linalg.norm(l1[0] - l1[1])), float(np.linalg.norm(l2[0] - l2[1]))


def d1(model: ShapeModel, theta1: ThetaLike, theta2: ThetaLike, cfg: MetricConfig, pair: Optional[Tuple[int, int]] = None) -> float:
    """Euclidean distance between L1,O images."""
    return _pair_distances(model, theta1, theta2, cfg, pair)[0]


def d2(model: ShapeModel, theta1: ThetaLike, theta2: ThetaLike, cfg: MetricConfig, pair: Optional[Tuple[int, int]] = None) -> float:
    """Euclidean distance between L2,O images; a pseudo-metric in general."""
    return _pair_distances(model, theta1, theta2, cfg, pair)[1]


def dv(model: ShapeModel, theta1: ThetaLike, theta2: ThetaLike, cfg: MetricConfig, pair: Optional[Tuple[int, int]] = None) -> float:
    """sqrt(gamma * d1^2 + (1 - gamma) * d2^2)."""
    first, second = _pair_distances(model, theta1, theta2, cfg, pair)
    return float(np.sqrt(cfg.gamma * first**2 + (1.0 - cfg.gamma) * second**2))


class CompositeMetric:
    """Block-wise composition of separable and two-mode metrics.

    ``embed`` maps parameter rows to R^D; ``columns`` names the mode each
    embedding coordinate belongs to, which is what lets squared distances
    regroup exactly into per-mode sums.
    """

    def __init__(
        self,
        model: ShapeModel,
        cfg: MetricConfig,
        decl: Optional[SeparabilityDecl] = None,
        validate: bool = True,
    ):
        self.model = model
        self.cfg = cfg
        self.decl = decl or SeparabilityDecl.default_for(model.modes)
        self.decl.check_partition(model.p)
        for block in self.decl.blocks:
            if len(block) > 2:
                raise UnsupportedBlockSize(
                    f"block {tuple(model.names[k] for k in block)} has {len(block)} modes; at most 2 are supported"
                )
        if validate:
            self.decl.validate(model)
        if len(cfg.origin) != model.p:
            raise ValueError(f"origin has {len(cfg.origin)} components, model has {model.p} modes")
        self.origin = cfg.origin.as_array()
        self.columns: List[int] = []
        self._slices: List[slice] = []
        for block in self.decl.blocks:
            start = len(self.columns)
            self.columns += list(block) if len(block) == 1 else [block[0], block[1], block[0], block[1]]
            self._slices.append(slice(start, len(self.columns)))

    @property
    def gamma(self) -> float:
        return self.cfg.gamma

    @property
    def dimension(self) -> int:
        return len(self.columns)

    def block_slice(self, b: int) -> slice:
        return self._slices[b]

    def embed_block(self, b: int, thetas: np.ndarray) -> np.ndarray:
        block = self.decl.blocks[b]
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if len(block) == 1:
            k = block[0]
            rows = _origin_rows(self.origin, thetas.shape[0])
            coord = signed_arcs(self.model, k, np.full(thetas.shape[0], self.origin[k]), thetas[:, k], rows, self.cfg.arc)
            return coord[:, None]
        l1, l2 = pair_images(self.model, thetas, self.origin, (block[0], block[1]), self.cfg.arc)
        return np.hstack([np.sqrt(self.gamma) * l1, np.sqrt(1.0 - self.gamma) * l2])

    def embed(self, thetas: ThetaLike) -> np.ndarray:
        rows, single = theta_rows(thetas)
        embedded = np.hstack([self.embed_block(b, rows) for b in range(len(self.decl.blocks))])
        return embedded[0] if single else embedded

    def distance(self, theta1: ThetaLike, theta2: ThetaLike) -> float:
        x, _ = theta_rows(theta1)
        y, _ = theta_rows(theta2)
        e = self.embed(np.vstack([x[:1], y[:1]]))
        return float(np.linalg.norm(e[0] - e[1]))

    __call__ = distance


def dist_composite(
    model: ShapeModel,
    theta1: ThetaLike,
    theta2: ThetaLike,
    cfg: MetricConfig,
    decl: Optional[SeparabilityDecl] = None,
) -> float:
    """sqrt of the sum of squared block distances (C^2 for singletons, dv^2 for pairs)."""
    return CompositeMetric(model, cfg, decl).distance(theta1, theta2)
