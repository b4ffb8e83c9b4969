"""JSON report plus the fitted-curve and warped-curve diagnostics (SVG with CSV)."""
from __future__ import annotations

import datetime as dt
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ..decompose.bootstrap import BootstrapSummary  # noqa: E402
from ..decompose.variation import Decomposition  # noqa: E402
from ..fitting.result import FitResult  # noqa: E402
from ..model.design import SampledCurve  # noqa: E402
from ..model.surface import warp_curve  # noqa: E402
from .curves_io import FLOAT_FORMAT  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.hashsalt"] = "tmv"
TIMESTAMP_KEY = "generated_at"
SCHEMA_PATH = Path(__file__).with_name("report_schema.json")


@lru_cache(maxsize=1)
def report_schema() -> Dict[str, Any]:
    with SCHEMA_PATH.open(encoding="utf-8") as handle:
        return json.load(handle)


def validate_report(report: Dict[str, Any]) -> None:
    """Raise jsonschema.ValidationError if ``report`` does not follow report_schema.json."""
    jsonschema.validate(instance=json.loads(json.dumps(report, default=_jsonable)), schema=report_schema())


def peak_location(x: np.ndarray, y: np.ndarray) -> float:
    """Location of the sampled maximum, refined by the parabola through its neighbours."""
    i = int(np.argmax(y))
    if i == 0 or i == len(y) - 1:
        return float(x[i])
    x0, x1, x2 = x[i - 1 : i + 2]
    y0, y1, y2 = y[i - 1 : i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    return float(x[i]) if a >= 0 else float(-b / (2 * a))


def flagged_curves(fit: FitResult, curves: Sequence[SampledCurve], warp_band: float) -> List[Dict[str, Any]]:
    """Curves whose warped maximum sits more than ``warp_band`` from the template maximum."""
    warped = [warp_curve(curve, theta, fit.grid, fit.modes) for curve, theta in zip(curves, fit.theta_hat)]
    lo = min(float(u.min()) for u, _ in warped)
    hi = max(float(u.max()) for u, _ in warped)
    target = fit.template.argmax(lo, hi)
    flagged = []
    for curve, (u, z) in zip(curves, warped):
        location = peak_location(u, z)
        if abs(location - target) > warp_band:
            flagged.append({"id": curve.id, "warped_peak": location, "template_peak": target})
    if flagged:
        logger.warning("%d curve(s) have warped maxima outside the band %.3g", len(flagged), warp_band)
    return flagged


def _save_svg(fig: plt.Figure, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_fitted(fit: FitResult, curves: Sequence[SampledCurve], out_dir: Path) -> Dict[str, str]:
    fitted = fit.fitted()
    frame = pd.DataFrame(
        {
            "curve_id": [c.id for c in curves for _ in fit.grid.t],
            "t": np.tile(fit.grid.t, len(curves)),
            "z": np.concatenate([c.z for c in curves]),
            "fitted": fitted.ravel(),
        }
    )
    csv_path, svg_path = out_dir / "fitted.csv", out_dir / "fitted.svg"
    frame.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, curve in enumerate(curves):
        (line,) = ax.plot(fit.grid.t, fitted[i], linewidth=1.0)
        ax.plot(fit.grid.t, curve.z, "o", markersize=3, color=line.get_color())
    ax.set_xlabel("t")
    ax.set_ylabel("z")
    ax.set_title("Observed curves and fitted curves")
    _save_svg(fig, svg_path)
    return {"csv": str(csv_path), "svg": str(svg_path)}


def plot_warped(fit: FitResult, curves: Sequence[SampledCurve], out_dir: Path, trace_points: int = 200) -> Dict[str, str]:
    warped = [warp_curve(curve, theta, fit.grid, fit.modes) for curve, theta in zip(curves, fit.theta_hat)]
    lo = min(float(u.min()) for u, _ in warped)
    hi = max(float(u.max()) for u, _ in warped)
    trace_u = np.linspace(lo, hi, trace_points)
    trace_z = fit.template(trace_u)
    frame = pd.concat(
        [
            pd.DataFrame({"curve_id": curve.id, "u": u, "z": z})
            for curve, (u, z) in zip(curves, warped)
        ]
        + [pd.DataFrame({"curve_id": "template", "u": trace_u, "z": trace_z})],
        ignore_index=True,
    )
    csv_path, svg_path = out_dir / "warped.csv", out_dir / "warped.svg"
    frame.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for u, z in warped:
        ax.plot(u, z, "o", markersize=3, alpha=0.6)
    ax.plot(trace_u, trace_z, color="black", linewidth=2.0, label=f"template (degree {fit.template.degree})")
    ax.set_xlabel("warped t")
    ax.set_ylabel("warped z")
    ax.set_title("Warped data and template")
    ax.legend()
    _save_svg(fig, svg_path)
    return {"csv": str(csv_path), "svg": str(svg_path)}


def build_report(
    fit: FitResult,
    decomposition: Optional[Decomposition],
    curves: Sequence[SampledCurve],
    config: Optional[Dict[str, Any]] = None,
    bootstrap: Optional[BootstrapSummary] = None,
    gamma_sweep: Optional[Sequence[Decomposition]] = None,
    warp_band: float = 0.2,
) -> Dict[str, Any]:
    stored = fit.to_dict()
    report: Dict[str, Any] = {
        "config": config or {},
        "template": stored["template"],
        "curves": stored["curves"],
        "diagnostics": {
            "fit": stored["fit"],
            "warp_band": warp_band,
            "flagged_curves": flagged_curves(fit, curves, warp_band),
            "multiple_minima": [cid for cid, k in zip(fit.ids, fit.multistart_report) if k > 1],
        },
    }
    if decomposition is not None:
        report["decomposition"] = decomposition.to_dict()
        report["diagnostics"]["frechet_search"] = decomposition.diagnostics
    if bootstrap is not None:
        report["bootstrap"] = bootstrap.to_dict()
    if gamma_sweep:
        report["gamma_sweep"] = [entry.to_dict() for entry in gamma_sweep]
    return report


def write_json(data: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True, default=_jsonable)
        handle.write("\n")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialise {type(value).__name__}")


def emit_report(
    fit: FitResult,
    decomposition: Optional[Decomposition],
    path: Path,
    curves: Sequence[SampledCurve],
    bootstrap: Optional[BootstrapSummary] = None,
    config: Optional[Dict[str, Any]] = None,
    gamma_sweep: Optional[Sequence[Decomposition]] = None,
    warp_band: float = 0.2,
) -> Dict[str, Any]:
    """Write report.json and the two diagnostic SVG/CSV pairs into directory ``path``."""
    out_dir = Path(path)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = build_report(fit, decomposition, curves, config, bootstrap, gamma_sweep, warp_band)
    report[TIMESTAMP_KEY] = dt.datetime.now(dt.timezone.utc).isoformat()
    validate_report(report)
    files = {
        "report": str(write_json(report, out_dir / "report.json")),
        "fitted": plot_fitted(fit, curves, out_dir),
        "warped": plot_warped(fit, curves, out_dir),
    }
    logger.info("report written to %s", out_dir)
    return files
