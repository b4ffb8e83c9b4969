"""Modes of variation and the parameter vectors that index them."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidModel

# Additive custom term: (theta_k values (N,), grid t (d,)) -> (N, d)
CustomMap = Callable[[np.ndarray, np.ndarray], np.ndarray]

FD_REL_TOL = 1e-5


class ModeKind(str, Enum):
    VERTICAL_SHIFT = "vertical_shift"
    HORIZONTAL_SHIFT = "horizontal_shift"
    GENERALIST_SPECIALIST = "generalist_specialist"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ModeSpec:
    """One predetermined mode of variation.

    ``scale`` reparameterises the mode: the value entering the model is
    ``scale * theta_k``.  Built-in modes compose as w*z(w*(t - m)) + h;
    custom modes add ``warp(theta_k, t)`` to the model.
    """

    kind: ModeKind
    name: str
    scale: float = 1.0
    warp: Optional[CustomMap] = None
    derivative: Optional[CustomMap] = None
    smooth: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ModeKind(self.kind))
        if not self.name:
            raise InvalidModel("mode needs a parameter name")
        if not np.isfinite(self.scale) or self.scale == 0:
            raise InvalidModel(f"mode {self.name}: scale must be finite and nonzero")
        if self.kind is ModeKind.CUSTOM:
            if self.warp is None or self.derivative is None:
                raise InvalidModel(f"custom mode {self.name} needs a warp and its derivative")
            _check_custom_derivative(self)

    @classmethod
    def vertical_shift(cls, name: str = "h", scale: float = 1.0) -> "ModeSpec":
        return cls(ModeKind.VERTICAL_SHIFT, name, scale)

    @classmethod
    def horizontal_shift(cls, name: str = "m", scale: float = 1.0) -> "ModeSpec":
        return cls(ModeKind.HORIZONTAL_SHIFT, name, scale)

    @classmethod
    def generalist_specialist(cls, name: str = "w", scale: float = 1.0) -> "ModeSpec":
        return cls(ModeKind.GENERALIST_SPECIALIST, name, scale)

    @classmethod
    def custom(cls, name: str, warp: CustomMap, derivative: CustomMap, smooth: bool = True) -> "ModeSpec":
        return cls(ModeKind.CUSTOM, name, 1.0, warp, derivative, smooth)

    @classmethod
    def from_key(cls, key: str) -> "ModeSpec":
        """Built-in mode from its report key, e.g. ``"horizontal_shift"``."""
        builders = {
            ModeKind.VERTICAL_SHIFT.value: cls.vertical_shift,
            ModeKind.HORIZONTAL_SHIFT.value: cls.horizontal_shift,
            ModeKind.GENERALIST_SPECIALIST.value: cls.generalist_specialist,
        }
        try:
            return builders[key]()
        except KeyError:
            raise InvalidModel(f"unknown mode {key!r}; expected one of {sorted(builders)}")

    @property
    def key(self) -> str:
        """Name used for this mode in reports."""
        return self.name if self.kind is ModeKind.CUSTOM else self.kind.value

    @property
    def identity_value(self) -> float:
        """Parameter value at which the mode leaves the template unchanged."""
        if self.kind is ModeKind.GENERALIST_SPECIALIST:
            return 1.0 / self.scale
        return 0.0


def _check_custom_derivative(mode: ModeSpec) -> None:
    sample_theta = np.array([-1.0, -0.5, 0.25, 1.0])
    sample_t = np.linspace(-1.0, 1.0, 5)
    step = 1e-6
    analytic = np.asarray(mode.derivative(sample_theta, sample_t), dtype=float)
    numeric = (
        np.asarray(mode.warp(sample_theta + step, sample_t), dtype=float)
        - np.asarray(mode.warp(sample_theta - step, sample_t), dtype=float)
    ) / (2 * step)
    scale = max(float(np.max(np.abs(analytic))), 1.0)
    if analytic.shape != numeric.shape or not np.allclose(numeric, analytic, rtol=FD_REL_TOL, atol=FD_REL_TOL * scale):
        raise InvalidModel(f"custom mode {mode.name}: derivative disagrees with finite differences")


@dataclass(frozen=True)
class ThetaVector:
    """Named parameter values, ordered like the study's mode list."""

    names: Tuple[str, ...]
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        names = tuple(str(n) for n in self.names)
        values = tuple(float(v) for v in self.values)
        if len(names) != len(values):
            raise InvalidModel(f"theta has {len(names)} names but {len(values)} values")
        if len(set(names)) != len(names):
            raise InvalidModel(f"duplicate parameter names in {names}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    @classmethod
    def for_modes(cls, modes: Sequence[ModeSpec], values: Iterable[float]) -> "ThetaVector":
        return cls(tuple(mode.name for mode in modes), tuple(values))

    @classmethod
    def from_mapping(cls, modes: Sequence[ModeSpec], mapping: Mapping[str, float]) -> "ThetaVector":
        """Missing components default to the mode's identity value."""
        return cls.for_modes(modes, [mapping.get(mode.name, mode.identity_value) for mode in modes])

    def __getitem__(self, name: str) -> float:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise KeyError(name)

    def get(self, name: str, default: float) -> float:
        return self[name] if name in self.names else default

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.names, self.values))

    def replace(self, **updates: float) -> "ThetaVector":
        unknown = set(updates) - set(self.names)
        if unknown:
            raise KeyError(", ".join(sorted(unknown)))
        return ThetaVector(self.names, tuple(updates.get(n, v) for n, v in zip(self.names, self.values)))
