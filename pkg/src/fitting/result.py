"""FitResult: the fitted template and per-curve parameters, with JSON persistence."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidModel
from ..model.design import SampledCurve, SamplingGrid
from ..model.modes import ModeKind, ModeSpec, ThetaVector
from ..model.surface import ManifoldPoint, ShapeModel
from ..model.template import PolynomialTemplate


@dataclass(frozen=True, eq=False)
class FitResult:
    model: ShapeModel
    ids: Tuple[str, ...]
    weights: np.ndarray
    thetas: np.ndarray
    sse: np.ndarray
    iterations: int
    converged: bool
    multistart_report: Tuple[int, ...]
    sse_trace: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for name in ("weights", "thetas", "sse"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "multistart_report", tuple(int(v) for v in self.multistart_report))
        object.__setattr__(self, "sse_trace", tuple(float(v) for v in self.sse_trace))
        n = len(self.ids)
        if self.thetas.shape != (n, self.model.p) or self.sse.shape != (n,) or self.weights.shape != (n,):
            raise InvalidModel("fit arrays disagree with the number of curves or modes")

    @property
    def template(self) -> PolynomialTemplate:
        return self.model.template

    @property
    def modes(self) -> Tuple[ModeSpec, ...]:
        return self.model.modes

    @property
    def grid(self) -> SamplingGrid:
        return self.model.grid

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def theta_hat(self) -> List[ThetaVector]:
        return [self.model.theta(row) for row in self.thetas]

    @property
    def projections(self) -> List[ManifoldPoint]:
        return [ManifoldPoint.on(self.model, theta) for theta in self.theta_hat]

    def fitted(self) -> np.ndarray:
        """(n, d) fitted curves R(theta_i, t)."""
        return self.model.evaluate(self.thetas)

    @property
    def total_sse(self) -> float:
        """Weighted sum of per-curve SSE, the quantity the fit minimises."""
        return float(self.weights @ self.sse)

    def with_values(self, **changes: Any) -> "FitResult":
        return replace(self, **changes)

    def subset(self, index: Sequence[int]) -> "FitResult":
        index = list(index)
        return replace(
            self,
            ids=tuple(self.ids[i] for i in index),
            weights=self.weights[index],
            thetas=self.thetas[index],
            sse=self.sse[index],
            multistart_report=tuple(self.multistart_report[i] for i in index),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Report blocks ``template``, ``curves`` and ``fit``."""
        return {
            "template": {"degree": self.template.degree, "coefficients": list(self.template.coefficients)},
            "curves": [
                {
                    "id": cid,
                    "weight": float(self.weights[i]),
                    "theta_hat": self.model.theta(self.thetas[i]).as_dict(),
                    "sse": float(self.sse[i]),
                    "n_minima": self.multistart_report[i],
                }
                for i, cid in enumerate(self.ids)
            ],
            "fit": {
                "modes": [{"key": m.key, "name": m.name, "scale": m.scale} for m in self.modes],
                "grid": self.grid.t.tolist(),
                "iterations": self.iterations,
                "converged": self.converged,
                "sse_trace": list(self.sse_trace),
                "total_sse": self.total_sse,
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], modes: Optional[Sequence[ModeSpec]] = None) -> "FitResult":
        """Inverse of ``to_dict``; custom modes must be passed in since functions are not stored."""
        try:
            fit = data["fit"]
            if modes is None:
                modes = [_mode_from_dict(entry) for entry in fit["modes"]]
            template = PolynomialTemplate(tuple(data["template"]["coefficients"]))
            model = ShapeModel(tuple(modes), template, SamplingGrid(fit["grid"]))
            curves = data["curves"]
            thetas = np.array([[entry["theta_hat"][name] for name in model.names] for entry in curves], dtype=float)
            return cls(
                model=model,
                ids=tuple(entry["id"] for entry in curves),
                weights=np.array([entry.get("weight", 1.0) for entry in curves]),
                thetas=thetas.reshape(len(curves), model.p),
                sse=np.array([entry["sse"] for entry in curves], dtype=float),
                iterations=int(fit.get("iterations", 0)),
                converged=bool(fit.get("converged", True)),
                multistart_report=tuple(entry.get("n_minima", 1) for entry in curves),
                sse_trace=tuple(fit.get("sse_trace", ())),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidModel(f"stored fit is missing or malformed: {exc}")


def _mode_from_dict(entry: Mapping[str, Any]) -> ModeSpec:
    key = entry["key"]
    if key not in {kind.value for kind in ModeKind if kind is not ModeKind.CUSTOM}:
        raise InvalidModel(f"stored fit uses custom mode {key!r}; pass its ModeSpec explicitly")
    return ModeSpec(ModeKind(key), entry.get("name", ModeSpec.from_key(key).name), float(entry.get("scale", 1.0)))


def residual_sse(fit: FitResult, curves: Sequence[SampledCurve]) -> np.ndarray:
    """Per-curve ||z_i - R(theta_i, t)||^2 recomputed from the data."""
    z = np.vstack([curve.z for curve in curves])
    return np.sum((z - fit.fitted()) ** 2, axis=1)
