"""Shared models and curve sets."""
from __future__ import annotations

import numpy as np
import pytest

from src.fitting.result import FitResult
from src.model import ModeSpec, PolynomialTemplate, SampledCurve, SamplingGrid, ShapeModel

QUARTIC = (2.0, 0.3, -1.5, -0.2, -0.3)


@pytest.fixture
def grid3():
    return SamplingGrid([-1.0, 0.0, 1.0])


@pytest.fixture
def parabola():
    return PolynomialTemplate((0.0, 0.0, -1.0))


@pytest.fixture
def hshift_model(grid3, parabola):
    return ShapeModel((ModeSpec.horizontal_shift(),), parabola, grid3)


@pytest.fixture
def vshift_model(grid3, parabola):
    return ShapeModel((ModeSpec.vertical_shift(),), parabola, grid3)


@pytest.fixture
def vh_model(grid3, parabola):
    """Separable: z(t - m) + h."""
    return ShapeModel((ModeSpec.horizontal_shift(), ModeSpec.vertical_shift()), parabola, grid3)


@pytest.fixture
def wm_model(grid3, parabola):
    return ShapeModel((ModeSpec.generalist_specialist(), ModeSpec.horizontal_shift()), parabola, grid3)


@pytest.fixture
def wmh_model(grid3, parabola):
    return ShapeModel(
        (ModeSpec.generalist_specialist(), ModeSpec.horizontal_shift(), ModeSpec.vertical_shift()), parabola, grid3
    )


@pytest.fixture
def quartic_model():
    return ShapeModel(
        (ModeSpec.generalist_specialist(), ModeSpec.horizontal_shift(), ModeSpec.vertical_shift()),
        PolynomialTemplate(QUARTIC),
        SamplingGrid(np.linspace(-1.0, 1.0, 11)),
    )


def random_wm(rng, n):
    """Points of the (w, m) manifold inside the usual study range."""
    return np.column_stack([rng.uniform(0.7, 1.4, n), rng.uniform(-0.4, 0.4, n)])


def make_fit(model, thetas, sse=None, weights=None):
    """FitResult built directly from parameters, bypassing the fitting loop."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    n = thetas.shape[0]
    return FitResult(
        model=model,
        ids=tuple(f"c{i}" for i in range(n)),
        weights=np.ones(n) if weights is None else weights,
        thetas=thetas,
        sse=np.zeros(n) if sse is None else sse,
        iterations=0,
        converged=True,
        multistart_report=(1,) * n,
    )


def curves_from(model, thetas, noise=None):
    z = model.evaluate(np.atleast_2d(thetas))
    if noise is not None:
        z = z + noise
    return [SampledCurve(f"c{i}", row) for i, row in enumerate(z)]
