"""Rectangular parameter grids: origin candidates and Fréchet mean search boxes."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidModel
from ..model.modes import ModeKind, ThetaVector
from ..model.surface import ShapeModel

EXPAND_FRACTION = 0.1
MIN_PAD = 1e-2


def expanded_interval(model: ShapeModel, k: int, values: np.ndarray, expand: float = EXPAND_FRACTION) -> Tuple[float, float]:
    """Range of values widened by ``expand`` of its width (with a floor), kept inside w > 0."""
    lo, hi = float(np.min(values)), float(np.max(values))
    pad = max(expand * (hi - lo), MIN_PAD * max(1.0, abs(0.5 * (lo + hi))))
    lo, hi = lo - pad, hi + pad
    mode = model.modes[k]
    if mode.kind is ModeKind.GENERALIST_SPECIALIST:
        # stay on the positive side of the canonical value scale * theta
        smallest = float(np.min(np.abs(values)))
        if mode.scale > 0:
            lo = max(lo, 0.5 * smallest)
        else:
            hi = min(hi, -0.5 * smallest)
    return lo, hi


@dataclass(frozen=True)
class OriginGrid:
    """Compact set K of candidate parameter vectors.

    ``intervals`` gives a closed interval per varied parameter; every other
    parameter is held at ``base`` (the model's identity values by default).
    """

    intervals: Tuple[Tuple[str, float, float], ...]
    resolution: int = 9
    base: Optional[Tuple[Tuple[str, float], ...]] = None

    def __post_init__(self) -> None:
        intervals = tuple((str(name), float(lo), float(hi)) for name, lo, hi in self.intervals)
        for name, lo, hi in intervals:
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise InvalidModel(f"origin grid interval for {name} must be bounded with lo <= hi, got ({lo}, {hi})")
        if self.resolution < 2:
            raise InvalidModel(f"origin grid resolution must be >= 2, got {self.resolution}")
        object.__setattr__(self, "intervals", intervals)
        if self.base is not None:
            object.__setattr__(self, "base", tuple((str(n), float(v)) for n, v in self.base))

    @classmethod
    def from_mapping(
        cls, intervals: Mapping[str, Sequence[float]], resolution: int = 9, base: Optional[Mapping[str, float]] = None
    ) -> "OriginGrid":
        return cls(
            tuple((name, lo, hi) for name, (lo, hi) in intervals.items()),
            resolution,
            None if base is None else tuple(base.items()),
        )

    @classmethod
    def single(cls, origin: ThetaVector) -> "OriginGrid":
        return cls((), 2, tuple(origin.as_dict().items()))

    @classmethod
    def around(
        cls,
        model: ShapeModel,
        thetas: np.ndarray,
        names: Optional[Iterable[str]] = None,
        resolution: int = 9,
        expand: float = EXPAND_FRACTION,
    ) -> "OriginGrid":
        """Bounding box of the sample over ``names``, widened by ``expand``.

        Without names the grid spans the parameters of two-mode blocks of the
        default separability declaration; origins of singleton blocks do not
        change any Fréchet variance.
        """
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if names is None:
            from ..metrics.separability import SeparabilityDecl

            decl = SeparabilityDecl.default_for(model.modes)
            names = [model.names[k] for block in decl.blocks if len(block) == 2 for k in block]
        intervals = []
        for name in names:
            k = model.index(name)
            intervals.append((name, *expanded_interval(model, k, thetas[:, k], expand)))
        return cls(tuple(intervals), resolution)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _, _ in self.intervals)

    def axis(self, name: str) -> np.ndarray:
        for label, lo, hi in self.intervals:
            if label == name:
                return np.unique(np.linspace(lo, hi, self.resolution))
        raise KeyError(name)

    def base_values(self, model: ShapeModel) -> Dict[str, float]:
        values = dict(zip(model.names, model.identity()))
        if self.base is not None:
            values.update(dict(self.base))
        return values

    def candidates(self, model: ShapeModel) -> List[ThetaVector]:
        """All grid points in lexicographic order of the varied parameters."""
        unknown = set(self.names) - set(model.names)
        if unknown:
            raise InvalidModel(f"origin grid names unknown parameters {sorted(unknown)}")
        base = self.base_values(model)
        axes = [self.axis(name) for name in self.names]
        points = []
        for combo in itertools.product(*axes):
            values = dict(base)
            values.update(zip(self.names, (float(v) for v in combo)))
            points.append(ThetaVector.for_modes(model.modes, [values[name] for name in model.names]))
        return points

    def to_dict(self) -> Dict[str, object]:
        return {
            "intervals": {name: [lo, hi] for name, lo, hi in self.intervals},
            "resolution": self.resolution,
        }
