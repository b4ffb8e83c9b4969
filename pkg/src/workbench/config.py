"""Study configuration: .env defaults, a JSON config file, then command-line overrides."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..decompose.bootstrap import PipelineConfig
from ..errors import InvalidModel
from ..fitting.alternating import FitConfig
from ..geometry.arclength import ArcConfig
from ..model.modes import ModeSpec

try:
    from dotenv import load_dotenv  # type: ignore[import]
except ImportError:  # pragma: no cover
    load_dotenv = None  # type: ignore[assignment]

ROOT = Path(__file__).resolve().parents[2]

_ENV_READY = False


def load_env() -> None:
    global _ENV_READY
    if _ENV_READY:
        return
    if load_dotenv:
        env_path = ROOT / ".env"
        if env_path.exists():
            load_dotenv(env_path)
    _ENV_READY = True


def env_int(name: str, default: int) -> int:
    value = os.environ.get(name, "").strip()
    if not value:
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {value!r}")


def env_float(name: str, default: float) -> float:
    value = os.environ.get(name, "").strip()
    if not value:
        return default
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {value!r}")


def log_dir() -> Path:
    return Path(os.environ.get("TMV_LOG_DIR", "").strip() or ROOT / "logs")


DEFAULT_MODES = ["generalist_specialist", "horizontal_shift", "vertical_shift"]


def read_config_file(path: Optional[str]) -> Dict[str, Any]:
    """Raw JSON mapping of a study config file; empty without a path."""
    if not path:
        return {}
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"config file not found: {config_path}")
    with config_path.open(encoding="utf-8") as handle:
        return json.load(handle)


@dataclass
class StudyConfig:
    """One analysis: model, metric, fitting and bootstrap settings."""

    degree: int = 4
    modes: List[str] = field(default_factory=lambda: list(DEFAULT_MODES))
    blocks: Optional[List[List[str]]] = None
    gamma: float = 0.5
    origin: Optional[Dict[str, float]] = None
    origin_resolution: int = 9
    sweep_gamma: List[float] = field(default_factory=list)
    weighted_sse: bool = False
    warp_band: float = 0.2
    boot: int = 500
    workers: int = 1
    seed: int = 0
    max_outer_iters: int = 100
    rel_tol: float = 1e-8
    multistart: int = 7
    quadrature_rel_tol: float = 1e-9
    synthetic: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.modes:
            raise InvalidModel("a study needs at least one mode of variation")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.boot < 1:
            raise ValueError(f"boot must be >= 1, got {self.boot}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.warp_band <= 0:
            raise ValueError(f"warp_band must be positive, got {self.warp_band}")

    @classmethod
    def defaults(cls) -> "StudyConfig":
        """Defaults with the TMV_* environment values applied."""
        load_env()
        return cls(
            gamma=env_float("TMV_GAMMA", 0.5),
            boot=env_int("TMV_BOOTSTRAP_B", 500),
            seed=env_int("TMV_SEED", 0),
            workers=env_int("TMV_WORKERS", 1),
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base: Optional["StudyConfig"] = None) -> "StudyConfig":
        values = asdict(base or cls.defaults())
        unknown = set(data) - set(values)
        if unknown:
            raise InvalidModel(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(data)
        return cls(**values)

    @classmethod
    def from_file(cls, path: Optional[str]) -> "StudyConfig":
        if not path:
            return cls.defaults()
        return cls.from_dict(read_config_file(path))

    def override(self, **values: Any) -> "StudyConfig":
        """Copy with every non-None value replaced."""
        return StudyConfig.from_dict({k: v for k, v in values.items() if v is not None}, base=self)

    def mode_specs(self) -> List[ModeSpec]:
        return [ModeSpec.from_key(key) for key in self.modes]

    def fit_config(self) -> FitConfig:
        return FitConfig(
            degree=self.degree,
            max_outer_iters=self.max_outer_iters,
            rel_tol=self.rel_tol,
            multistart=self.multistart,
            seed=self.seed,
        )

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            fit=self.fit_config(),
            modes=tuple(self.mode_specs()),
            blocks=None if self.blocks is None else tuple(tuple(block) for block in self.blocks),
            gamma=self.gamma,
            origin=self.origin,
            origin_resolution=self.origin_resolution,
            weighted_sse=self.weighted_sse,
            arc=ArcConfig(quadrature_rel_tol=self.quadrature_rel_tol),
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
