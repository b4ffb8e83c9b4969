"""Exception types shared across the TMV packages."""
from __future__ import annotations

from typing import Any, Optional


class TMVError(RuntimeError):
    """Base class for numerical failures raised by the pipeline."""


class InvalidModel(ValueError):
    """A template, grid or mode list violates its construction rules."""


class NonConvergent(TMVError):
    """Adaptive quadrature hit its maximum depth before meeting the tolerance."""


class NonInvertible(TMVError):
    """The arc-coordinate map is flat around the requested coordinate."""


class NotSeparable(TMVError):
    """A block declared separable depends on parameters outside the block."""


class UnsupportedBlockSize(TMVError):
    """Blocks of three or more non-separable modes are not supported."""


class SearchBoxTooSmall(TMVError):
    """The Fréchet mean search ended on the boundary of its search box."""

    def __init__(self, message: str, theta: Any = None):
        super().__init__(message)
        self.theta = theta


class NoConvergence(TMVError):
    """Fitting did not converge; ``fit`` holds the best iterate when one exists."""

    def __init__(self, message: str, fit: Optional[Any] = None):
        super().__init__(message)
        self.fit = fit


class BootstrapAborted(TMVError):
    """Too many bootstrap replicates failed."""


class ParseError(ValueError):
    """Malformed curve file; ``line`` is the 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GridMismatch(ValueError):
    """Curves in one study were sampled on different grids."""
