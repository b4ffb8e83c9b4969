"""Curves CSV: header ``curve_id,t,z[,weight]``, one row per (curve, grid point)."""
from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import pandas as pd

from ..errors import GridMismatch, InvalidModel, ParseError
from ..model.design import SampledCurve, SamplingGrid, check_curves

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("curve_id", "t", "z")
FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


def _number(text: str, column: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"{column} value {text!r} is not a number", line=line)


def _read_table(path: PathLike) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise ParseError("file is empty", line=1)
    except pd.errors.ParserError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise ParseError(f"malformed row: {exc}", line=int(match.group(1)) if match else None)
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise ParseError(f"missing column(s): {', '.join(missing)}", line=1)
    if frame.empty:
        raise ParseError("no data rows", line=2)
    return frame


def load_curves(path: PathLike) -> Tuple[SamplingGrid, List[SampledCurve]]:
    """Grid and curves from a CSV file; curves keep their order of first appearance."""
    frame = _read_table(path)
    has_weight = "weight" in frame.columns
    rows: Dict[str, Dict[str, list]] = {}
    for offset, record in enumerate(frame.itertuples(index=False)):
        line = offset + 2
        entry = record._asdict()
        cid = str(entry["curve_id"]).strip()
        if not cid:
            raise ParseError("empty curve_id", line=line)
        t = _number(entry["t"], "t", line)
        z = _number(entry["z"], "z", line)
        weight_text = str(entry["weight"]).strip() if has_weight else ""
        weight = _number(weight_text, "weight", line) if weight_text else 1.0
        if not weight > 0:
            raise ParseError(f"weight must be positive, got {weight}", line=line)
        data = rows.setdefault(cid, {"t": [], "z": [], "weight": [], "lines": []})
        if data["t"] and t <= data["t"][-1]:
            raise ParseError(f"curve {cid}: t values must be strictly increasing", line=line)
        if data["weight"] and weight != data["weight"][0]:
            raise ParseError(f"curve {cid}: weight changes between rows", line=line)
        data["t"].append(t)
        data["z"].append(z)
        data["weight"].append(weight)
        data["lines"].append(line)

    first = next(iter(rows.values()))
    try:
        grid = SamplingGrid(first["t"])
    except InvalidModel as exc:
        raise ParseError(str(exc), line=first["lines"][0])
    curves = []
    for cid, data in rows.items():
        if data["t"] != list(grid.t):
            raise GridMismatch(f"curve {cid} is sampled at {data['t']}, expected the grid {list(grid.t)}")
        curves.append(SampledCurve(cid, data["z"], data["weight"][0]))
    logger.info("loaded %d curves on a %d-point grid from %s", len(curves), grid.d, path)
    return grid, curves


def save_curves(path: PathLike, grid: SamplingGrid, curves: Sequence[SampledCurve]) -> Path:
    """Write curves with 17 significant digits, so that load_curves reads back the same floats."""
    check_curves(grid, curves)
    frame = pd.DataFrame(
        {
            "curve_id": [curve.id for curve in curves for _ in grid.t],
            "t": [float(t) for _ in curves for t in grid.t],
            "z": [float(v) for curve in curves for v in curve.z],
            "weight": [curve.weight for curve in curves for _ in grid.t],
        }
    )
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, float_format=FLOAT_FORMAT)
    return out
