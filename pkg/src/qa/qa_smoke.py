"""Lightweight smoke test for the environment and a tiny end-to-end study."""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from ..decompose.bootstrap import PipelineConfig, run_pipeline
from ..fitting.alternating import FitConfig
from ..geometry.arclength import arcdist
from ..model.design import SamplingGrid
from ..model.modes import ModeSpec
from ..model.surface import ShapeModel
from ..model.template import PolynomialTemplate
from ..workbench.config import StudyConfig, load_env, log_dir
from ..workbench.curves_io import load_curves, save_curves
from ..workbench.simulate import SyntheticSpec, simulate

# horizontal shift 0 -> 1 on z(t) = -t^2, grid (-1, 0, 1)
ARC_ORACLE = 3.427394


def check_env() -> StudyConfig:
    cfg = StudyConfig.defaults()
    directory = log_dir()
    directory.mkdir(parents=True, exist_ok=True)
    if not os.access(directory, os.W_OK):
        raise SystemExit(f"Log directory not writable: {directory}")
    return cfg


def check_arclength() -> float:
    model = ShapeModel(
        (ModeSpec.horizontal_shift(),), PolynomialTemplate((0.0, 0.0, -1.0)), SamplingGrid([-1.0, 0.0, 1.0])
    )
    value = arcdist(model, 0, 0.0, 1.0, [0.0])
    if abs(value - ARC_ORACLE) > 1e-5:
        raise SystemExit(f"Arc length oracle mismatch: {value} vs {ARC_ORACLE}")
    return value


def check_pipeline():
    spec = SyntheticSpec(n=8, seed=3)
    cfg = PipelineConfig(fit=FitConfig(max_outer_iters=100, rel_tol=1e-6, multistart=3), origin_resolution=3)
    result = simulate(spec, cfg)
    with tempfile.TemporaryDirectory() as tmp:
        path = save_curves(Path(tmp) / "curves.csv", result.grid, result.curves)
        grid, curves = load_curves(path)
    if not all(np.array_equal(a.z, b.z) for a, b in zip(result.curves, curves)):
        raise SystemExit("Curves CSV round trip changed values")
    return run_pipeline(curves, grid, cfg)


def main():
    load_env()
    cfg = check_env()
    arc = check_arclength()
    fit, decomposition = check_pipeline()

    print(f"Config OK. seed={cfg.seed}, gamma={cfg.gamma}, bootstrap B={cfg.boot}, logs={log_dir()}")
    print(f"Arc length OK. horizontal shift 0->1 = {arc:.6f}")
    print(f"Fit OK. {fit.n} curves, {fit.iterations} iterations, weighted SSE={fit.total_sse:.4g}")
    shares = ", ".join(f"{k}={v:.2f}%" for k, v in decomposition.rss_per_mode.items())
    print(f"Decomposition OK. {shares}, total={decomposition.rss_total:.2f}%")


if __name__ == "__main__":
    main()
