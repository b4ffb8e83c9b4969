"""The regression surface R(theta, t) of the shape-invariant model.

All evaluation is vectorised over parameter rows: a ``theta`` argument may be
a ThetaVector, a 1-D array of length p, or an (N, p) array; results then have
shape (d,) or (N, d) accordingly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import InvalidModel
from .design import SampledCurve, SamplingGrid
from .modes import ModeKind, ModeSpec, ThetaVector
from .template import PolynomialTemplate

ThetaLike = Union[ThetaVector, Sequence[float], np.ndarray]


def theta_rows(theta: ThetaLike) -> Tuple[np.ndarray, bool]:
    """(rows, single) where rows is 2-D and single says the input was one vector."""
    if isinstance(theta, ThetaVector):
        theta = theta.values
    arr = np.asarray(theta, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim != 2:
        raise InvalidModel(f"theta must be 1-D or 2-D, got shape {arr.shape}")
    return arr, False


@dataclass(frozen=True)
class ShapeModel:
    """Template, modes and grid: everything needed to evaluate R(theta, t)."""

    modes: Tuple[ModeSpec, ...]
    template: PolynomialTemplate
    grid: SamplingGrid

    def __post_init__(self) -> None:
        modes = tuple(self.modes)
        if not modes:
            raise InvalidModel("at least one mode of variation is required")
        names = [mode.name for mode in modes]
        if len(set(names)) != len(names):
            raise InvalidModel(f"duplicate mode parameter names: {names}")
        builtin = [mode.kind for mode in modes if mode.kind is not ModeKind.CUSTOM]
        if len(set(builtin)) != len(builtin):
            raise InvalidModel("each built-in mode may appear at most once")
        object.__setattr__(self, "modes", modes)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(mode.name for mode in self.modes)

    @property
    def p(self) -> int:
        return len(self.modes)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def index_of(self, kind: ModeKind) -> Optional[int]:
        for k, mode in enumerate(self.modes):
            if mode.kind is kind:
                return k
        return None

    def identity(self) -> np.ndarray:
        return np.array([mode.identity_value for mode in self.modes], dtype=float)

    def theta(self, values: ThetaLike) -> ThetaVector:
        rows, _ = theta_rows(values)
        return ThetaVector.for_modes(self.modes, rows[0])

    def with_template(self, template: PolynomialTemplate) -> "ShapeModel":
        return ShapeModel(self.modes, template, self.grid)

    def _canonical(self, rows: np.ndarray, kind: ModeKind) -> np.ndarray:
        k = self.index_of(kind)
        if k is None:
            return np.full(rows.shape[0], 1.0 if kind is ModeKind.GENERALIST_SPECIALIST else 0.0)
        return rows[:, k] * self.modes[k].scale

    def _parts(self, rows: np.ndarray, check: bool):
        if rows.shape[1] != self.p:
            raise InvalidModel(f"theta has {rows.shape[1]} components, model has {self.p} modes")
        w = self._canonical(rows, ModeKind.GENERALIST_SPECIALIST)
        if check and np.any(w <= 0):
            raise ValueError(f"generalist-specialist parameter must be positive, got {w.min()}")
        m = self._canonical(rows, ModeKind.HORIZONTAL_SHIFT)
        h = self._canonical(rows, ModeKind.VERTICAL_SHIFT)
        shifted = self.grid.t[None, :] - m[:, None]
        u = w[:, None] * shifted
        return w, h, shifted, u

    def evaluate(self, theta: ThetaLike, check: bool = True) -> np.ndarray:
        rows, single = theta_rows(theta)
        w, h, _, u = self._parts(rows, check)
        values = w[:, None] * self.template(u) + h[:, None]
        for k, mode in enumerate(self.modes):
            if mode.kind is ModeKind.CUSTOM:
                values = values + np.asarray(mode.warp(rows[:, k] * mode.scale, self.grid.t), dtype=float)
        return values[0] if single else values

    def velocity(self, theta: ThetaLike, k: int, check: bool = True) -> np.ndarray:
        """dR/dtheta_k for every row, from the analytic template derivative."""
        rows, single = theta_rows(theta)
        mode = self.modes[k]
        w, _, shifted, u = self._parts(rows, check)
        if mode.kind is ModeKind.VERTICAL_SHIFT:
            vel = np.ones((rows.shape[0], self.grid.d))
        elif mode.kind is ModeKind.HORIZONTAL_SHIFT:
            vel = -(w**2)[:, None] * self.template.derivative(u)
        elif mode.kind is ModeKind.GENERALIST_SPECIALIST:
            vel = self.template(u) + w[:, None] * self.template.derivative(u) * shifted
        else:
            vel = np.asarray(mode.derivative(rows[:, k] * mode.scale, self.grid.t), dtype=float)
        vel = vel * mode.scale
        return vel[0] if single else vel

    def jacobian(self, theta: ThetaLike, check: bool = True) -> np.ndarray:
        """(d, p) matrix of partial derivatives at one parameter vector."""
        rows, _ = theta_rows(theta)
        return np.column_stack([self.velocity(rows[0], k, check) for k in range(self.p)])


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    """A parameter vector together with its cached image R(theta, t)."""

    theta: ThetaVector
    image: np.ndarray

    def __post_init__(self) -> None:
        image = np.array(self.image, dtype=float)
        image.setflags(write=False)
        object.__setattr__(self, "image", image)

    @classmethod
    def on(cls, model: ShapeModel, theta: ThetaLike) -> "ManifoldPoint":
        vector = theta if isinstance(theta, ThetaVector) else model.theta(theta)
        return cls(vector, model.evaluate(vector.values))


def eval_model(
    modes: Sequence[ModeSpec], template: PolynomialTemplate, theta: ThetaLike, grid: SamplingGrid
) -> np.ndarray:
    return ShapeModel(tuple(modes), template, grid).evaluate(theta)


def mode_velocity(
    modes: Sequence[ModeSpec], template: PolynomialTemplate, theta: ThetaLike, k: int, grid: SamplingGrid
) -> np.ndarray:
    return ShapeModel(tuple(modes), template, grid).velocity(theta, k)


def central_difference(model: ShapeModel, theta: ThetaLike, k: int, rel_step: float = 1e-6) -> np.ndarray:
    """Finite-difference dR/dtheta_k, used only to validate analytic velocities."""
    rows, single = theta_rows(theta)
    step = rel_step * np.maximum(np.abs(rows[:, k]), 1.0)
    up = rows.copy()
    down = rows.copy()
    up[:, k] += step
    down[:, k] -= step
    diff = (model.evaluate(up, check=False) - model.evaluate(down, check=False)) / (2 * step[:, None])
    return diff[0] if single else diff


def check_local_injectivity(model: ShapeModel, theta: ThetaLike, rtol: float = 1e-10) -> Tuple[int, np.ndarray]:
    """Rank of dR/dtheta at theta and its singular values.

    Full rank p means R(., t) is locally one-to-one there, so the space of
    variation is locally a p-dimensional manifold.
    """
    singular = np.linalg.svd(model.jacobian(theta), compute_uv=False)
    cutoff = rtol * max(float(singular[0]), np.finfo(float).tiny) if singular.size else 0.0
    return int(np.sum(singular > cutoff)), singular


def warp_curve(
    curve: SampledCurve,
    theta_hat: ThetaVector,
    grid: SamplingGrid,
    modes: Optional[Sequence[ModeSpec]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Map a curve back onto the template scale: ((t - m) w, (z - h) / w).

    Components are located by mode kind when ``modes`` is given, otherwise by
    the conventional names w, m and h; absent modes take identity values.
    """
    canonical = {"w": 1.0, "m": 0.0, "h": 0.0}
    if modes is None:
        for name in canonical:
            canonical[name] = theta_hat.get(name, canonical[name])
    else:
        kinds = {
            ModeKind.GENERALIST_SPECIALIST: "w",
            ModeKind.HORIZONTAL_SHIFT: "m",
            ModeKind.VERTICAL_SHIFT: "h",
        }
        for mode in modes:
            if mode.kind in kinds:
                canonical[kinds[mode.kind]] = theta_hat[mode.name] * mode.scale
    w, m, h = canonical["w"], canonical["m"], canonical["h"]
    if w <= 0:
        raise ValueError(f"generalist-specialist parameter must be positive, got {w}")
    return (grid.t - m) * w, (curve.z - h) / w
