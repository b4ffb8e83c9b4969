"""Long synthetic-study runs; select with ``pytest -m slow``."""
import time

import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from src.decompose import PipelineConfig, bootstrap, decompose, decompose_fit
from src.errors import NoConvergence
from src.fitting import FitConfig, fit_all
from src.frechet import OriginGrid, frechet_mean_1d, select_origin
from src.metrics import CompositeMetric, MetricConfig
from src.model import ModeSpec, PolynomialTemplate, SamplingGrid, ShapeModel, ThetaVector
from src.workbench import SyntheticSpec, simulate

pytestmark = pytest.mark.slow

FIXED_ORIGIN = {"w": 1.0, "m": 0.0, "h": 0.0}


def fit_or_best(curves, grid, cfg):
    try:
        return fit_all(curves, grid, config=cfg.fit, modes=cfg.modes)
    except NoConvergence as exc:
        return exc.fit


def test_fifty_curve_study_recovers_oracle_shares():
    spec = SyntheticSpec(n=50, seed=2024)
    cfg = PipelineConfig(fit=FitConfig(rel_tol=1e-7, max_outer_iters=300))
    grid, curves, oracle = simulate(spec, cfg)
    started = time.perf_counter()
    fit = fit_or_best(curves, grid, cfg)
    result = decompose_fit(fit, cfg)
    assert time.perf_counter() - started < 60.0
    for key, share in oracle.rss_per_mode.items():
        assert result.rss_per_mode[key] == pytest.approx(share, abs=3.0)


def test_default_pipeline_runs_within_a_minute():
    grid, curves, _ = simulate(SyntheticSpec(n=50, seed=2024), PipelineConfig(origin=FIXED_ORIGIN))
    started = time.perf_counter()
    fit = fit_or_best(curves, grid, PipelineConfig())
    decompose_fit(fit, PipelineConfig())
    assert time.perf_counter() - started < 60.0


def test_vertical_only_study_attributes_signal_to_the_vertical_mode():
    laws = {"w": ("uniform", 1.0, 1.0), "m": ("uniform", 0.0, 0.0)}
    spec = SyntheticSpec(laws=laws, n=50, seed=31)
    cfg = PipelineConfig(fit=FitConfig(rel_tol=1e-7, max_outer_iters=300))
    grid, curves, oracle = simulate(spec, cfg)
    result = decompose_fit(fit_or_best(curves, grid, cfg), cfg)
    assert oracle.rss_per_mode["generalist_specialist"] == pytest.approx(0.0, abs=1e-12)
    assert oracle.rss_per_mode["horizontal_shift"] == pytest.approx(0.0, abs=1e-12)
    for key, share in oracle.rss_per_mode.items():
        assert result.rss_per_mode[key] == pytest.approx(share, abs=2.0)


def test_reparameterised_study_has_identical_oracle():
    spec = SyntheticSpec(n=30, seed=5)
    plain = simulate(spec, PipelineConfig(origin=FIXED_ORIGIN))
    truth = plain.truth
    modes = (ModeSpec.generalist_specialist(), ModeSpec.horizontal_shift(scale=2.0), ModeSpec.vertical_shift())
    scaled_model = ShapeModel(modes, truth.template, truth.grid)
    scaled = truth.with_values(model=scaled_model, thetas=truth.thetas * [1.0, 0.5, 1.0])
    result = decompose(scaled, MetricConfig(ThetaVector.from_mapping(modes, FIXED_ORIGIN)))
    for key, share in plain.oracle.rss_per_mode.items():
        assert result.rss_per_mode[key] == pytest.approx(share, abs=1e-8)


def _fine_arc_coordinates(model, lo, hi, points=20001):
    s = np.linspace(lo, hi, points)
    speed = np.linalg.norm(model.velocity(s[:, None], 0), axis=1)
    arc = cumulative_trapezoid(speed, s, initial=0.0)
    return s, arc - np.interp(0.0, s, arc)


def test_sample_frechet_variance_is_consistent(hshift_model):
    """Errors are averaged over 20 fixed-seed samples per n, so one unlucky draw cannot break the ordering."""
    s, arc = _fine_arc_coordinates(hshift_model, -1.0, 1.0)
    oracle_rng = np.random.default_rng(0)
    var_f = float(np.var(np.interp(oracle_rng.uniform(-1.0, 1.0, 1_000_000), s, arc)))

    metric_origin = ThetaVector.for_modes(hshift_model.modes, [0.0])

    metric = CompositeMetric(hshift_model, MetricConfig(metric_origin))
    rng = np.random.default_rng(7)
    errors = {}
    for n in (10, 100, 1000):
        gaps = []
        for _ in range(20):
            sample = rng.uniform(-1.0, 1.0, size=(n, 1))
            gaps.append(abs(frechet_mean_1d(sample, 0, metric).variance - var_f))
        errors[n] = float(np.mean(gaps))
    assert errors[10] > errors[100] > errors[1000]
    assert errors[1000] <= 0.1 * var_f


def test_selected_origin_approaches_population_minimum():
    model = ShapeModel(
        (ModeSpec.generalist_specialist(), ModeSpec.horizontal_shift()),
        PolynomialTemplate((2.0, 0.3, -1.5, -0.2, -0.3)),
        SamplingGrid(np.linspace(-1.0, 1.0, 11)),
    )
    grid = OriginGrid.from_mapping({"w": [0.85, 1.15], "m": [-0.15, 0.15]}, resolution=3)
    rng = np.random.default_rng(11)

    def draw(n):
        return np.column_stack([rng.uniform(0.8, 1.25, n), rng.normal(0.0, 0.16, n)])

    _, population = select_origin(draw(5000), grid, 0.5, None, model)
    _, estimate = select_origin(draw(500), grid, 0.5, None, model)
    assert estimate == pytest.approx(population, rel=0.15)


def test_bootstrap_intervals_cover_the_oracle():
    spec = SyntheticSpec(n=50, seed=77)
    cfg = PipelineConfig(fit=FitConfig(multistart=3, rel_tol=1e-6, max_outer_iters=300), origin=FIXED_ORIGIN)
    grid, curves, oracle = simulate(spec, cfg)
    summary = bootstrap(curves, grid, cfg, B=200, seed=1)
    assert summary.n_failed == 0
    for key, share in oracle.rss_per_mode.items():
        row = summary.row(f"rss_{key}")
        assert row["p5"] <= share <= row["p95"]
