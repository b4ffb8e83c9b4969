"""Polynomial common-shape template z(.) and its gauge maps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from ..errors import InvalidModel

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class PolynomialTemplate:
    """z(u) = c_0 + c_1 u + ... + c_p u^p, coefficients in ascending order.

    The degree must be at least 2 and some coefficient of index >= 2 must be
    nonzero, otherwise the shift modes are not identifiable.
    """

    coefficients: tuple

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) < 3:
            raise InvalidModel(f"template degree must be >= 2, got {len(coeffs) - 1}")
        if not all(np.isfinite(coeffs)):
            raise InvalidModel("template coefficients must be finite")
        if not any(c != 0.0 for c in coeffs[2:]):
            raise InvalidModel("template needs a nonzero coefficient of degree >= 2")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def coef(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=float)

    def __call__(self, x: ArrayLike) -> np.ndarray:
        return P.polyval(x, self.coef)

    def derivative(self, x: ArrayLike) -> np.ndarray:
        return P.polyval(x, P.polyder(self.coef))

    def rescaled(self, g: float) -> "PolynomialTemplate":
        """Template u -> g * z(g * u)."""
        powers = np.arange(self.degree + 1)
        return PolynomialTemplate(tuple(self.coef * g ** (powers + 1)))

    def shifted(self, c: float) -> "PolynomialTemplate":
        """Template u -> z(u - c)."""
        composed = Polynomial(self.coef)(Polynomial([-c, 1.0])).coef
        padded = np.zeros(self.degree + 1)
        padded[: composed.size] = composed[: self.degree + 1]
        return PolynomialTemplate(tuple(padded))

    def raised(self, b: float) -> "PolynomialTemplate":
        """Template u -> z(u) + b."""
        coeffs = list(self.coefficients)
        coeffs[0] += b
        return PolynomialTemplate(tuple(coeffs))

    def argmax(self, lo: float, hi: float) -> float:
        """Location of the maximum of z on [lo, hi]."""
        candidates = [lo, hi]
        for root in P.polyroots(P.polyder(self.coef)):
            if abs(root.imag) < 1e-12 and lo <= root.real <= hi:
                candidates.append(float(root.real))
        values = self(np.array(candidates))
        return float(candidates[int(np.argmax(values))])


def eval_template(template: Union[PolynomialTemplate, Sequence[float]], x: ArrayLike) -> np.ndarray:
    """Horner evaluation of sum c_j x^j; also accepts a bare coefficient sequence."""
    if isinstance(template, PolynomialTemplate):
        coeffs = template.coef
    else:
        coeffs = np.atleast_1d(np.asarray(template, dtype=float))
    value = P.polyval(x, coeffs)
    return float(value) if np.ndim(value) == 0 else value
