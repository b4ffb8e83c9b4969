"""Observation design: the shared sampling grid and the sampled curves."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from ..errors import GridMismatch, InvalidModel


def _frozen_array(values: Iterable[float]) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SamplingGrid:
    """Strictly increasing environment values t_1 < ... < t_d (d >= 3)."""

    t: np.ndarray

    def __post_init__(self) -> None:
        t = _frozen_array(self.t)
        if t.ndim != 1:
            raise InvalidModel("sampling grid must be one-dimensional")
        if t.size < 3:
            raise InvalidModel(f"sampling grid needs at least 3 points, got {t.size}")
        if not np.all(np.isfinite(t)):
            raise InvalidModel("sampling grid contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise InvalidModel("sampling grid must be strictly increasing")
        object.__setattr__(self, "t", t)

    @property
    def d(self) -> int:
        return int(self.t.size)

    @property
    def span(self) -> float:
        return float(self.t[-1] - self.t[0])

    def __len__(self) -> int:
        return self.d

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SamplingGrid) and np.array_equal(self.t, other.t)

    def __hash__(self) -> int:
        return hash(self.t.tobytes())


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """One family's responses on the study grid, with its fitting weight."""

    id: str
    z: np.ndarray
    weight: float = 1.0

    def __post_init__(self) -> None:
        z = _frozen_array(self.z)
        if z.ndim != 1:
            raise InvalidModel(f"curve {self.id}: responses must be one-dimensional")
        if not np.all(np.isfinite(z)):
            raise InvalidModel(f"curve {self.id}: responses contain non-finite values")
        weight = float(self.weight)
        if not weight > 0:
            raise InvalidModel(f"curve {self.id}: weight must be positive, got {self.weight}")
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "weight", weight)


def check_curves(grid: SamplingGrid, curves: Sequence[SampledCurve]) -> None:
    """Every curve must carry exactly one response per grid point."""
    for curve in curves:
        if curve.z.size != grid.d:
            raise GridMismatch(
                f"curve {curve.id} has {curve.z.size} responses for a grid of {grid.d} points"
            )


def response_matrix(curves: Sequence[SampledCurve]) -> np.ndarray:
    return np.vstack([curve.z for curve in curves])


def weight_vector(curves: Sequence[SampledCurve]) -> np.ndarray:
    return np.array([curve.weight for curve in curves], dtype=float)


def curve_ids(curves: Sequence[SampledCurve]) -> List[str]:
    return [curve.id for curve in curves]
