"""Separability declarations: which modes form additively separable blocks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidModel, NotSeparable
from ..model.modes import ModeKind, ModeSpec
from ..model.surface import ShapeModel

Box = Dict[str, Tuple[float, float]]

MIXED_PARTIAL_TOL = 1e-6


def check_box(model: ShapeModel) -> Box:
    """A plausible parameter box for numerical property checks."""
    box: Box = {}
    for mode in model.modes:
        if mode.kind is ModeKind.GENERALIST_SPECIALIST:
            lo, hi = 0.6, 1.6
        elif mode.kind is ModeKind.HORIZONTAL_SHIFT:
            lo, hi = -0.25 * model.grid.span, 0.25 * model.grid.span
        else:
            lo, hi = -1.0, 1.0
        box[mode.name] = tuple(sorted((lo / mode.scale, hi / mode.scale)))
    return box


def sample_box(model: ShapeModel, box: Box, n: int, rng: np.random.Generator) -> np.ndarray:
    lo = np.array([box[name][0] for name in model.names])
    hi = np.array([box[name][1] for name in model.names])
    return lo + (hi - lo) * rng.random((n, model.p))


@dataclass(frozen=True)
class SeparabilityDecl:
    """Partition of mode indices into blocks, e.g. ((0, 1), (2,)) for (w, m, h)."""

    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        blocks = tuple(tuple(int(k) for k in block) for block in self.blocks)
        if any(len(block) == 0 for block in blocks):
            raise InvalidModel("separability blocks must be nonempty")
        flat = [k for block in blocks for k in block]
        if len(set(flat)) != len(flat):
            raise InvalidModel(f"separability blocks overlap: {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def default_for(cls, modes: Sequence[ModeSpec]) -> "SeparabilityDecl":
        """Horizontal shift and generalist-specialist share a block; the rest are singletons."""
        kinds = [mode.kind for mode in modes]
        paired: Tuple[int, ...] = ()
        if ModeKind.GENERALIST_SPECIALIST in kinds and ModeKind.HORIZONTAL_SHIFT in kinds:
            paired = (kinds.index(ModeKind.GENERALIST_SPECIALIST), kinds.index(ModeKind.HORIZONTAL_SHIFT))
        blocks = [paired] if paired else []
        blocks += [(k,) for k in range(len(modes)) if k not in paired]
        return cls(tuple(sorted(blocks, key=min)))

    @classmethod
    def from_names(cls, modes: Sequence[ModeSpec], blocks: Iterable[Iterable[str]]) -> "SeparabilityDecl":
        names = [mode.name for mode in modes]
        keys = [mode.key for mode in modes]

        def index(label: str) -> int:
            if label in names:
                return names.index(label)
            if label in keys:
                return keys.index(label)
            raise InvalidModel(f"unknown mode {label!r} in separability declaration")

        return cls(tuple(tuple(index(label) for label in block) for block in blocks))

    def check_partition(self, p: int) -> None:
        covered = sorted(k for block in self.blocks for k in block)
        if covered != list(range(p)):
            raise InvalidModel(f"separability blocks {self.blocks} do not partition {p} modes")

    def block_of(self, k: int) -> Tuple[int, ...]:
        for block in self.blocks:
            if k in block:
                return block
        raise KeyError(k)

    @property
    def all_singletons(self) -> bool:
        return all(len(block) == 1 for block in self.blocks)

    def validate(
        self,
        model: ShapeModel,
        box: Optional[Box] = None,
        n_points: int = 20,
        tol: float = MIXED_PARTIAL_TOL,
        seed: int = 0,
    ) -> None:
        """Cross-block mixed partials d2R/dtheta_a dtheta_b must vanish at random points."""
        self.check_partition(model.p)
        if len(self.blocks) < 2:
            return
        rng = np.random.default_rng(seed)
        points = sample_box(model, box or check_box(model), n_points, rng)
        for a in range(model.p):
            vel = model.velocity(points, a, check=False)
            scale = max(1.0, float(np.max(np.abs(vel))))
            for b in range(model.p):
                if b in self.block_of(a):
                    continue
                step = 1e-5 * np.maximum(np.abs(points[:, b]), 1.0)
                up, down = points.copy(), points.copy()
                up[:, b] += step
                down[:, b] -= step
                mixed = (model.velocity(up, a, check=False) - model.velocity(down, a, check=False)) / (2 * step[:, None])
                worst = float(np.max(np.abs(mixed)))
                if worst > tol * scale:
                    raise NotSeparable(
                        f"modes {model.names[a]} and {model.names[b]} interact "
                        f"(mixed partial {worst:.3g}) but sit in different blocks"
                    )
