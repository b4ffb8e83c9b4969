import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from conftest import QUARTIC, curves_from, make_fit
from src.decompose import PipelineConfig
from src.errors import InvalidModel, NoConvergence
from src.fitting import (
    FitConfig,
    FitResult,
    default_start_box,
    fit_all,
    neighbor_seed,
    normalize_identifiability,
    project_curve,
    project_model,
    residual_sse,
)
from src.fitting.projection import latin_starts
from src.model import ModeSpec, PolynomialTemplate, SampledCurve, SamplingGrid
from src.workbench import SyntheticSpec, simulate

TWO_MINIMA_M = np.sqrt(2.25 - 4.0 / 3.0)


@pytest.fixture
def downward_parabola_curves(hshift_model):
    """A sits symmetrically between two projections; B and C are exact shifts."""
    t = hshift_model.grid.t
    return [
        SampledCurve("A", -(t**2) - 2.25),
        SampledCurve("B", hshift_model.evaluate([1.2])),
        SampledCurve("C", hshift_model.evaluate([-3.0])),
    ]


def test_projection_recovers_noiseless_truth(quartic_model):
    truth = np.array([1.1, 0.1, 0.3])
    z = quartic_model.evaluate(truth)
    theta, sse, n_minima = project_model(quartic_model, z, [truth])
    assert sse <= 1e-18
    assert n_minima == 1

    perturbed = [truth * [1.1, 1.2, 0.8], truth * [0.9, 0.8, 1.2]]
    theta, sse, _ = project_model(quartic_model, z, perturbed)
    assert sse <= 1e-18
    np.testing.assert_allclose(theta, truth, atol=1e-7)


def test_projection_never_worse_than_truth_under_noise(quartic_model):
    rng = np.random.default_rng(71)
    truth = np.array([0.9, -0.1, 0.2])
    noise = rng.normal(0.0, 0.05, quartic_model.grid.d)
    _, sse, _ = project_model(quartic_model, quartic_model.evaluate(truth) + noise, [truth])
    assert sse <= float(noise @ noise)


def test_projection_failures(quartic_model):
    z = quartic_model.evaluate([1.0, 0.0, 0.0])
    with pytest.raises(NoConvergence):
        project_model(quartic_model, z, [[1.3, 0.2, 0.4]], max_nfev=1)
    with pytest.raises(ValueError):
        project_model(quartic_model, z, [])


def test_project_curve_returns_named_parameters(quartic_model):
    curve = curves_from(quartic_model, [[1.05, 0.05, -0.1]])[0]
    theta, sse, _ = project_curve(
        curve, quartic_model.template, quartic_model.modes, [[1.0, 0.0, 0.0]], quartic_model.grid
    )
    assert theta.names == ("w", "m", "h")
    assert theta["w"] == pytest.approx(1.05, abs=1e-7)
    assert sse <= 1e-18


def test_two_minima_fixture(hshift_model, downward_parabola_curves):
    z = downward_parabola_curves[0].z

    theta, sse, n_minima = project_model(hshift_model, z, [[0.0], [1.2]])
    assert theta[0] == pytest.approx(TWO_MINIMA_M, abs=1e-6)
    assert sse == pytest.approx(3 * (4.0 / 3.0) ** 2 + 8 * TWO_MINIMA_M**2, rel=1e-9)
    assert n_minima == 1

    theta, _, _ = project_model(hshift_model, z, [[0.0], [-1.2]])
    assert theta[0] == pytest.approx(-TWO_MINIMA_M, abs=1e-6)

    _, _, n_minima = project_model(hshift_model, z, [[1.2], [-1.2]])
    assert n_minima == 2

    theta, sse, _ = project_model(hshift_model, z, [[0.0]])
    assert theta[0] == 0.0
    assert sse == pytest.approx(3 * 2.25**2)


def test_neighbour_seed_escapes_the_stationary_point(hshift_model, downward_parabola_curves):
    thetas = np.array([[0.0], [1.2], [-3.0]])
    seeds = neighbor_seed(downward_parabola_curves, thetas)
    assert seeds[0][0][0] == 0.0
    assert seeds[0][1][0] == 1.2
    theta, _, _ = project_model(hshift_model, downward_parabola_curves[0].z, seeds[0])
    assert theta[0] == pytest.approx(TWO_MINIMA_M, abs=1e-6)


def test_neighbour_seed_small_sets(hshift_model):
    curves = curves_from(hshift_model, [[0.1], [0.1]])
    seeds = neighbor_seed(curves, np.array([[0.3], [0.5]]))
    assert [s[1][0] for s in seeds] == [0.5, 0.3]
    assert {s[0][0] for s in seeds} == {s[1][0] for s in seeds}
    assert [len(s) for s in neighbor_seed(curves[:1], np.array([[0.3]]))] == [1]
    with pytest.raises(ValueError):
        neighbor_seed(curves, np.array([[0.3]]))


def test_latin_starts_stay_in_the_start_box(quartic_model):
    z = quartic_model.evaluate([1.0, 0.0, 0.0])
    center = np.array([1.0, 0.0, 0.0])
    lo, hi = default_start_box(quartic_model, z, center)
    np.testing.assert_allclose(lo, [0.7, -0.4, -0.2 * np.ptp(z)])
    np.testing.assert_allclose(hi, [1.4, 0.4, 0.2 * np.ptp(z)])
    draws = latin_starts(quartic_model, z, center, 5, np.random.default_rng(3))
    assert draws.shape == (5, 3)
    assert np.all(draws >= lo) and np.all(draws <= hi)
    np.testing.assert_array_equal(draws, latin_starts(quartic_model, z, center, 5, np.random.default_rng(3)))


def test_fit_all_noiseless_from_truth(quartic_model):
    rng = np.random.default_rng(73)
    truth = np.column_stack([rng.uniform(0.8, 1.25, 6), rng.normal(0, 0.1, 6), rng.normal(0, 0.2, 6)])
    curves = curves_from(quartic_model, truth)
    fit = fit_all(curves, quartic_model.grid, config=FitConfig(degree=4, multistart=3), inits=truth)
    assert fit.converged
    assert fit.total_sse <= 1e-16
    np.testing.assert_allclose(fit.fitted(), quartic_model.evaluate(truth), atol=1e-8)
    assert fit.ids == tuple(c.id for c in curves)


def test_noiseless_study_round_trips_from_the_default_start():
    study = simulate(SyntheticSpec(n=20, seed=2024, noise_sd=0.0), PipelineConfig(origin={"w": 1.0, "m": 0.0, "h": 0.0}))
    try:
        fit = fit_all(study.curves, study.grid, config=FitConfig(degree=4))
    except NoConvergence as exc:
        fit = exc.fit
    assert fit.total_sse <= 1e-12
    np.testing.assert_allclose(fit.thetas, study.truth.thetas, atol=1e-5)
    np.testing.assert_allclose(fit.template.coefficients, study.truth.template.coefficients, atol=1e-6)


def test_vertical_only_fit_has_a_closed_form():
    rng = np.random.default_rng(79)
    grid = SamplingGrid(np.linspace(-1.0, 1.0, 11))
    z = rng.normal(0.0, 1.0, size=(5, grid.d)) + np.sin(2 * grid.t)
    curves = [SampledCurve(f"c{i}", row) for i, row in enumerate(z)]
    fit = fit_all(curves, grid, config=FitConfig(degree=2), modes=[ModeSpec.vertical_shift()])
    template = P.polyfit(grid.t, z.mean(axis=0), 2)
    np.testing.assert_allclose(fit.template.coefficients, template, atol=1e-8)
    np.testing.assert_allclose(fit.thetas[:, 0], (z - P.polyval(grid.t, template)).mean(axis=1), atol=1e-8)
    np.testing.assert_allclose(fit.sse, residual_sse(fit, curves), rtol=1e-8, atol=1e-12)


def test_sse_trace_never_increases(quartic_model):
    rng = np.random.default_rng(83)
    truth = np.column_stack([rng.uniform(0.8, 1.25, 8), rng.normal(0, 0.1, 8), rng.normal(0, 0.2, 8)])
    curves = curves_from(quartic_model, truth, noise=rng.normal(0, 0.03, (8, quartic_model.grid.d)))
    try:
        fit = fit_all(curves, quartic_model.grid, config=FitConfig(max_outer_iters=25, seed=4))
    except NoConvergence as exc:
        fit = exc.fit
    trace = np.array(fit.sse_trace)
    assert trace.size == fit.iterations + 1
    assert np.all(np.diff(trace) <= 0.0)
    assert trace[-1] <= trace[0]


def test_fit_all_input_checks(quartic_model):
    curves = curves_from(quartic_model, [[1.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        fit_all(curves, quartic_model.grid)
    short = [SampledCurve("a", [1.0, 2.0, 3.0]), SampledCurve("b", [1.0, 2.0, 3.5])]
    with pytest.raises(ValueError):
        fit_all(short, quartic_model.grid)


def test_fit_config_validation():
    with pytest.raises(InvalidModel):
        FitConfig(degree=1)
    with pytest.raises(ValueError):
        FitConfig(max_outer_iters=0)
    with pytest.raises(ValueError):
        FitConfig(multistart=0)


def _unnormalized_fit(quartic_model):
    rng = np.random.default_rng(89)
    thetas = np.column_stack([rng.uniform(0.9, 1.6, 7), rng.normal(0.3, 0.1, 7), rng.normal(1.0, 0.3, 7)])
    return make_fit(quartic_model, thetas, weights=rng.uniform(0.5, 2.0, 7))


def test_normalization_keeps_fitted_curves(quartic_model):
    fit = _unnormalized_fit(quartic_model)
    normalized = normalize_identifiability(fit)
    np.testing.assert_allclose(normalized.fitted(), fit.fitted(), atol=1e-10)

    omega = normalized.weights
    w, m, h = normalized.thetas.T
    assert np.sum(omega * np.log(w)) == pytest.approx(0.0, abs=1e-12)
    assert np.sum(omega * m) == pytest.approx(0.0, abs=1e-12)
    assert np.sum(omega * h) == pytest.approx(0.0, abs=1e-12)


def test_normalization_is_idempotent_and_undoes_gauge_moves(quartic_model):
    normalized = normalize_identifiability(_unnormalized_fit(quartic_model))
    again = normalize_identifiability(normalized)
    np.testing.assert_allclose(again.thetas, normalized.thetas, atol=1e-12)
    np.testing.assert_allclose(again.template.coefficients, normalized.template.coefficients, atol=1e-12)

    thetas = normalized.thetas.copy()
    thetas[:, 2] += 5.0 * thetas[:, 0]
    coefficients = list(normalized.template.coefficients)
    coefficients[0] -= 5.0
    moved = normalized.with_values(
        model=normalized.model.with_template(PolynomialTemplate(tuple(coefficients))), thetas=thetas
    )
    np.testing.assert_allclose(moved.fitted(), normalized.fitted(), atol=1e-12)
    restored = normalize_identifiability(moved)
    np.testing.assert_allclose(restored.thetas, normalized.thetas, atol=1e-10)
    np.testing.assert_allclose(restored.template.coefficients, normalized.template.coefficients, atol=1e-10)


def test_fit_result_dictionary_round_trip(quartic_model):
    fit = _unnormalized_fit(quartic_model).with_values(sse_trace=(3.0, 2.0), iterations=1)
    data = fit.to_dict()
    assert data["template"] == {"degree": 4, "coefficients": list(QUARTIC)}
    assert data["curves"][0]["theta_hat"].keys() == {"w", "m", "h"}
    assert data["fit"]["modes"][1] == {"key": "horizontal_shift", "name": "m", "scale": 1.0}

    restored = FitResult.from_dict(data)
    np.testing.assert_array_equal(restored.thetas, fit.thetas)
    np.testing.assert_array_equal(restored.weights, fit.weights)
    assert restored.model == fit.model
    assert restored.sse_trace == (3.0, 2.0)
    with pytest.raises(InvalidModel):
        FitResult.from_dict({"curves": []})


def test_subset_keeps_rows(quartic_model):
    fit = _unnormalized_fit(quartic_model)
    part = fit.subset([2, 0])
    assert part.ids == ("c2", "c0")
    np.testing.assert_array_equal(part.thetas, fit.thetas[[2, 0]])
