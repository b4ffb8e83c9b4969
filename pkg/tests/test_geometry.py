import numpy as np
import pytest

from src.errors import NonConvergent
from src.geometry import (
    ArcConfig,
    arc_coordinate,
    arc_coordinates,
    arcdist,
    arcdist_polyline,
    integrate_batch,
    signed_arcs,
)
from src.model import ModeSpec, ShapeModel

# integral of 2 sqrt(3 m^2 + 2) over [0, 1]
PARABOLA_SHIFT_ARC = 2.0 * (0.5 * np.sqrt(5.0) + np.arcsinh(np.sqrt(1.5)) / np.sqrt(3.0))


def test_horizontal_shift_arc_matches_closed_form(hshift_model):
    assert PARABOLA_SHIFT_ARC == pytest.approx(3.427394, abs=1e-6)
    value = arcdist(hshift_model, 0, 0.0, 1.0, [0.0])
    assert value == pytest.approx(PARABOLA_SHIFT_ARC, rel=1e-9)


def test_polyline_agrees_with_quadrature(hshift_model):
    quad = arcdist(hshift_model, 0, 0.0, 1.0, [0.0])
    poly = arcdist_polyline(hshift_model, 0, 0.0, 1.0, [0.0], 100_000)
    assert poly == pytest.approx(quad, rel=1e-6)


def test_vertical_shift_has_constant_speed(vshift_model):
    assert arcdist(vshift_model, 0, 0.0, 2.0, [0.0]) == pytest.approx(2.0 * np.sqrt(3.0), rel=1e-12)
    assert arcdist(vshift_model, 0, 1.5, 1.5, [0.0]) == 0.0


def test_arcdist_is_symmetric_and_additive(wm_model):
    fixed = [1.2, 0.0]
    ab = arcdist(wm_model, 1, -0.3, 0.4, fixed)
    assert ab == arcdist(wm_model, 1, 0.4, -0.3, fixed)
    split = arcdist(wm_model, 1, -0.3, 0.1, fixed) + arcdist(wm_model, 1, 0.1, 0.4, fixed)
    assert split == pytest.approx(ab, rel=1e-9)


def test_arc_coordinate_sign(hshift_model):
    assert arc_coordinate(hshift_model, 0, -1.0, 0.0, [0.0]) == pytest.approx(-PARABOLA_SHIFT_ARC, rel=1e-9)
    assert arc_coordinate(hshift_model, 0, 1.0, 0.0, [0.0]) == pytest.approx(PARABOLA_SHIFT_ARC, rel=1e-9)


def test_signed_arcs_batch_matches_single_calls(wm_model):
    rows = np.array([[0.8, 0.0], [1.0, 0.1], [1.3, -0.2]])
    starts = np.array([0.0, -0.1, 0.2])
    ends = np.array([0.3, -0.4, 0.2])
    batch = signed_arcs(wm_model, 1, starts, ends, rows)
    for j in range(3):
        single = arc_coordinate(wm_model, 1, ends[j], starts[j], rows[j])
        assert batch[j] == pytest.approx(single, rel=1e-12, abs=1e-15)
    assert batch[2] == 0.0
    assert batch[1] < 0 < batch[0]


def test_quadrature_depth_limit_raises(hshift_model):
    tight = ArcConfig(quadrature_rel_tol=1e-15, quadrature_max_depth=1)
    with pytest.raises(NonConvergent):
        arcdist(hshift_model, 0, 0.0, 1.0, [0.0], tight)


def test_non_finite_speed_raises():
    with pytest.raises(NonConvergent):
        integrate_batch(lambda s, owner: np.full(s.shape, np.nan), np.array([0.0]), np.array([1.0]), 1e-9, 20)


def test_integrate_batch_handles_many_integrals():
    lo = np.zeros(4)
    hi = np.array([1.0, 2.0, 0.5, 0.0])
    values = integrate_batch(lambda s, owner: 3.0 * s**2, lo, hi, 1e-10, 30)
    np.testing.assert_allclose(values, hi**3, rtol=1e-12, atol=1e-15)


def test_non_smooth_custom_mode_uses_polyline(grid3, parabola):
    kink = ModeSpec.custom(
        "kink",
        lambda th, t: np.outer(th, np.abs(t)),
        lambda th, t: np.outer(np.ones_like(th), np.abs(t)),
        smooth=False,
    )
    model = ShapeModel((kink,), parabola, grid3)
    assert arcdist(model, 0, -1.0, 2.0, [0.0]) == pytest.approx(3.0 * np.sqrt(2.0), rel=1e-12)


def test_arc_config_and_polyline_validation(hshift_model):
    with pytest.raises(ValueError):
        ArcConfig(quadrature_rel_tol=0.0)
    with pytest.raises(ValueError):
        arcdist_polyline(hshift_model, 0, 0.0, 1.0, [0.0], 0)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_chord_never_exceeds_arc(quartic_model, k):
    rng = np.random.default_rng(211 + k)
    n = 50
    rows = np.column_stack([rng.uniform(0.6, 1.5, n), rng.uniform(-0.5, 0.5, n), rng.uniform(-2.0, 2.0, n)])
    span = {0: (0.6, 1.5), 1: (-0.5, 0.5), 2: (-2.0, 2.0)}[k]
    a, b = rng.uniform(*span, n), rng.uniform(*span, n)
    arcs = np.abs(signed_arcs(quartic_model, k, a, b, rows))
    start, end = rows.copy(), rows.copy()
    start[:, k], end[:, k] = a, b
    chords = np.linalg.norm(quartic_model.evaluate(end) - quartic_model.evaluate(start), axis=1)
    assert np.all(chords <= arcs + 1e-9)


def test_single_segment_polyline_is_the_chord(quartic_model):
    fixed = [1.2, 0.1, 0.3]
    a, b = -0.4, 0.5
    start, end = np.array([fixed]), np.array([fixed])
    start[0, 1], end[0, 1] = a, b
    chord = float(np.linalg.norm(quartic_model.evaluate(end) - quartic_model.evaluate(start)))
    assert arcdist_polyline(quartic_model, 1, a, b, fixed, 1) == pytest.approx(chord, rel=1e-12)
    assert chord <= arcdist(quartic_model, 1, a, b, fixed)


def test_polyline_error_shrinks_with_segments(hshift_model):
    errors = [abs(arcdist_polyline(hshift_model, 0, 0.0, 1.0, [0.0], n) - PARABOLA_SHIFT_ARC) for n in (16, 256, 4096)]
    assert errors[0] > errors[1] > errors[2]


@pytest.mark.parametrize("k, fixed", [(0, [0.0]), (1, [1.1, 0.0, 0.2])])
def test_arc_coordinates_preserve_order(hshift_model, quartic_model, k, fixed):
    model = hshift_model if k == 0 else quartic_model
    rng = np.random.default_rng(223)
    values = np.sort(rng.uniform(-1.0, 1.0, 100))
    rows = np.tile(fixed, (100, 1)).astype(float)
    coords = arc_coordinates(model, k, values, 0.0, rows)
    assert np.all(np.diff(coords) > 0)
    assert np.sign(coords) @ np.sign(values) == 100
