import numpy as np
import pytest

from conftest import random_wm
from src.errors import NotSeparable, UnsupportedBlockSize
from src.metrics import (
    CompositeMetric,
    MetricConfig,
    SeparabilityDecl,
    c_component,
    d1,
    d2,
    dist_composite,
    dist_separable,
    dv,
    pair_images,
)
from src.model import ThetaVector

PARABOLA_SHIFT_ARC = 2.0 * (0.5 * np.sqrt(5.0) + np.arcsinh(np.sqrt(1.5)) / np.sqrt(3.0))


def origin_for(model, values):
    return ThetaVector.for_modes(model.modes, values)


def triangle_violations(embedded, triples):
    a, b, c = (embedded[triples[:, j]] for j in range(3))
    ab = np.linalg.norm(a - b, axis=1)
    bc = np.linalg.norm(b - c, axis=1)
    ac = np.linalg.norm(a - c, axis=1)
    return int(np.sum(ac > (ab + bc) * (1 + 1e-9) + 1e-15))


def test_c_component_examples(vshift_model, vh_model):
    assert c_component(vshift_model, 0, 0.0, 2.0) == pytest.approx(2.0 * np.sqrt(3.0), rel=1e-12)
    assert c_component(vh_model, 0, 0.7, 0.7) == 0.0
    assert c_component(vh_model, 0, 0.0, 1.0) == pytest.approx(PARABOLA_SHIFT_ARC, rel=1e-9)


def test_c_component_detects_interaction(wm_model):
    with pytest.raises(NotSeparable):
        c_component(wm_model, 1, 0.0, 0.5)


def test_dist_separable_example(vh_model):
    decl = SeparabilityDecl.default_for(vh_model.modes)
    value = dist_separable(vh_model, [0.0, 0.0], [1.0, 2.0], decl)
    assert value == pytest.approx(np.sqrt(PARABOLA_SHIFT_ARC**2 + 12.0), rel=1e-9)
    assert value == pytest.approx(4.8731, abs=1e-4)
    assert dist_separable(vh_model, [0.3, -1.0], [0.3, -1.0], decl) == 0.0


def test_dist_separable_requires_singletons(vh_model):
    with pytest.raises(NotSeparable):
        dist_separable(vh_model, [0.0, 0.0], [1.0, 1.0], SeparabilityDecl(((0, 1),)))


def test_dist_separable_triangle_inequality(vh_model):
    rng = np.random.default_rng(5)
    decl = SeparabilityDecl.default_for(vh_model.modes)
    points = np.column_stack([rng.uniform(-0.5, 0.5, 60), rng.uniform(-1.0, 1.0, 60)])
    for x, y, z in points.reshape(20, 3, 2):
        xy = dist_separable(vh_model, x, y, decl)
        yz = dist_separable(vh_model, y, z, decl)
        xz = dist_separable(vh_model, x, z, decl)
        assert xz <= (xy + yz) * (1 + 1e-9)
        assert xy == dist_separable(vh_model, y, x, decl)


@pytest.mark.parametrize("gamma", [0.25, 0.5, 1.0])
def test_metric_axioms_on_wm_manifold(wm_model, gamma):
    rng = np.random.default_rng(17)
    metric = CompositeMetric(wm_model, MetricConfig(origin_for(wm_model, [1.0, 0.0]), gamma))
    points = random_wm(rng, 300)
    embedded = metric.embed(points)
    triples = rng.integers(0, 300, size=(1000, 3))
    assert triangle_violations(embedded, triples) == 0

    for x, y in points[:20].reshape(10, 2, 2):
        assert metric.distance(x, y) == metric.distance(y, x)
        assert metric.distance(x, x) == 0.0
        assert dv(wm_model, x, y, metric.cfg) == pytest.approx(metric.distance(x, y), rel=1e-12)


def test_d1_d2_direct_axioms(wm_model):
    rng = np.random.default_rng(3)
    cfg = MetricConfig(origin_for(wm_model, [1.1, 0.05]))
    for x, y, z in random_wm(rng, 30).reshape(10, 3, 2):
        for fn in (d1, d2):
            assert fn(wm_model, x, y, cfg) >= 0.0
            assert fn(wm_model, x, y, cfg) == fn(wm_model, y, x, cfg)
            assert fn(wm_model, x, x, cfg) == 0.0
            assert fn(wm_model, x, z, cfg) <= (fn(wm_model, x, y, cfg) + fn(wm_model, y, z, cfg)) * (1 + 1e-9)


def test_d2_triangle_inequality_via_embedding(wm_model):
    rng = np.random.default_rng(23)
    metric = CompositeMetric(wm_model, MetricConfig(origin_for(wm_model, [0.9, -0.1]), gamma=0.0))
    embedded = metric.embed(random_wm(rng, 300))
    assert triangle_violations(embedded, rng.integers(0, 300, size=(1000, 3))) == 0


def test_distances_to_the_origin_are_image_norms(wm_model):
    origin = origin_for(wm_model, [1.0, 0.0])
    cfg = MetricConfig(origin)
    theta = np.array([1.3, 0.25])
    l1, l2 = pair_images(wm_model, theta[None, :], origin, (0, 1))
    assert d1(wm_model, theta, origin.as_array(), cfg) == pytest.approx(np.linalg.norm(l1[0]), rel=1e-12)
    assert d2(wm_model, origin.as_array(), theta, cfg) == pytest.approx(np.linalg.norm(l2[0]), rel=1e-12)
    l1_origin, l2_origin = pair_images(wm_model, origin.as_array()[None, :], origin, (0, 1))
    assert np.all(l1_origin == 0.0) and np.all(l2_origin == 0.0)


def test_separable_collapse(vh_model):
    rng = np.random.default_rng(29)
    decl = SeparabilityDecl.default_for(vh_model.modes)
    pairs = np.column_stack(
        [rng.uniform(-0.5, 0.5, 200), rng.uniform(-1.0, 1.0, 200), rng.uniform(-0.5, 0.5, 200), rng.uniform(-1.0, 1.0, 200)]
    )
    separable = [dist_separable(vh_model, p[:2], p[2:], decl) for p in pairs]
    for _ in range(5):
        cfg = MetricConfig(origin_for(vh_model, [rng.uniform(-0.5, 0.5), rng.uniform(-1.0, 1.0)]))
        for p, reference in zip(pairs, separable):
            first = d1(vh_model, p[:2], p[2:], cfg)
            assert abs(first - d2(vh_model, p[:2], p[2:], cfg)) <= 1e-8
            assert abs(first - reference) <= 1e-8


@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_dv_squared_is_linear_in_gamma(wm_model, gamma):
    rng = np.random.default_rng(31)
    cfg = MetricConfig(origin_for(wm_model, [1.05, -0.05]), gamma)
    for x, y in random_wm(rng, 20).reshape(10, 2, 2):
        blended = dv(wm_model, x, y, cfg) ** 2
        expected = gamma * d1(wm_model, x, y, cfg) ** 2 + (1 - gamma) * d2(wm_model, x, y, cfg) ** 2
        assert abs(blended - expected) <= 1e-12 * max(1.0, expected)


def test_dv_endpoints(wm_model):
    x, y = np.array([0.8, 0.3]), np.array([1.3, -0.2])
    base = MetricConfig(origin_for(wm_model, [1.0, 0.0]))
    assert dv(wm_model, x, y, base.with_gamma(1.0)) == pytest.approx(d1(wm_model, x, y, base), rel=1e-15)
    assert dv(wm_model, x, y, base.with_gamma(0.0)) == pytest.approx(d2(wm_model, x, y, base), rel=1e-15)


def test_dist_composite_blocks(wmh_model):
    cfg = MetricConfig(origin_for(wmh_model, [1.0, 0.0, 0.0]))
    assert dist_composite(wmh_model, [1.2, 0.1, 0.5], [1.2, 0.1, 0.5], cfg) == 0.0
    assert dist_composite(wmh_model, [1.2, 0.1, 0.0], [1.2, 0.1, 2.0], cfg) == pytest.approx(
        2.0 * np.sqrt(3.0), rel=1e-12
    )
    x, y = [0.9, 0.2, 0.4], [1.3, -0.1, 0.4]
    assert dist_composite(wmh_model, x, y, cfg) == pytest.approx(dv(wmh_model, x, y, cfg, pair=(0, 1)), rel=1e-12)


def test_composite_rejects_large_or_invalid_blocks(wmh_model):
    cfg = MetricConfig(origin_for(wmh_model, [1.0, 0.0, 0.0]))
    with pytest.raises(UnsupportedBlockSize):
        CompositeMetric(wmh_model, cfg, SeparabilityDecl(((0, 1, 2),)))
    with pytest.raises(NotSeparable):
        CompositeMetric(wmh_model, cfg, SeparabilityDecl(((0,), (1,), (2,))))


def test_embedding_columns_follow_blocks(wmh_model):
    metric = CompositeMetric(wmh_model, MetricConfig(origin_for(wmh_model, [1.0, 0.0, 0.0])))
    assert metric.decl.blocks == ((0, 1), (2,))
    assert metric.columns == [0, 1, 0, 1, 2]
    assert metric.embed(np.array([[1.1, 0.1, 0.3], [0.9, 0.0, -0.2]])).shape == (2, 5)


def test_gamma_must_lie_in_unit_interval(wm_model):
    with pytest.raises(ValueError):
        MetricConfig(origin_for(wm_model, [1.0, 0.0]), gamma=1.5)
