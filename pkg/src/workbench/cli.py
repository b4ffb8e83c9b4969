"""Command-line entrypoint: simulate, fit, decompose, bootstrap and report."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from dataclasses import replace
from typing import List, Optional, Tuple

from ..decompose.bootstrap import bootstrap, decompose_fit
from ..decompose.variation import gamma_sweep
from ..fitting.alternating import fit_all
from ..fitting.result import FitResult
from ..frechet.grid import OriginGrid
from ..model.design import SampledCurve, SamplingGrid
from ..model.modes import ThetaVector
from .config import StudyConfig, load_env, log_dir, read_config_file
from .curves_io import load_curves, save_curves
from .report import emit_report, write_json
from .simulate import SyntheticSpec, simulate

logger = logging.getLogger(__name__)


def configure_logging() -> None:
    load_env()
    directory = log_dir()
    directory.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=os.environ.get("LOG_LEVEL", "INFO").strip(),
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=[
            logging.FileHandler(directory / "tmv.log"),
            logging.StreamHandler(),
        ],
    )


def parse_gammas(value: Optional[str]) -> Optional[List[float]]:
    if not value:
        return None
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--sweep-gamma expects comma-separated numbers, got {value!r}")


def study_config(args: argparse.Namespace) -> StudyConfig:
    cfg = StudyConfig.from_file(getattr(args, "config", None))
    return cfg.override(
        degree=getattr(args, "degree", None),
        gamma=getattr(args, "gamma", None),
        boot=getattr(args, "boot", None),
        workers=getattr(args, "workers", None),
        seed=getattr(args, "seed", None),
        sweep_gamma=parse_gammas(getattr(args, "sweep_gamma", None)),
    )


def bootstrap_requested(args: argparse.Namespace) -> bool:
    """--boot, a boot value in --config, or a set TMV_BOOTSTRAP_B."""
    if args.boot is not None or os.environ.get("TMV_BOOTSTRAP_B", "").strip():
        return True
    return "boot" in read_config_file(args.config)


def out_dir(args: argparse.Namespace) -> Path:
    path = Path(args.out or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def load_or_fit(args: argparse.Namespace, cfg: StudyConfig) -> Tuple[SamplingGrid, List[SampledCurve], FitResult]:
    if not args.input:
        raise ValueError("--input <csv> is required")
    grid, curves = load_curves(args.input)
    if getattr(args, "fit", None):
        with open(args.fit, encoding="utf-8") as handle:
            fit = FitResult.from_dict(json.load(handle), cfg.mode_specs())
        if list(fit.ids) != [c.id for c in curves] or fit.grid != grid:
            raise ValueError(f"stored fit {args.fit} does not match the curves in {args.input}")
        logger.info("reusing stored fit from %s", args.fit)
        return grid, curves, fit
    pipeline = cfg.pipeline()
    fit = fit_all(curves, grid, config=pipeline.fit, modes=pipeline.modes)
    return grid, curves, fit


def sweep(fit: FitResult, cfg: StudyConfig):
    if not cfg.sweep_gamma:
        return None
    pipeline = cfg.pipeline()
    origin = None if cfg.origin is None else ThetaVector.from_mapping(pipeline.modes, cfg.origin)
    grid = OriginGrid.around(fit.model, fit.thetas, resolution=cfg.origin_resolution)
    return gamma_sweep(fit, pipeline.decl(), cfg.sweep_gamma, origin, grid, cfg.weighted_sse, pipeline.arc)


def cmd_simulate(args):
    """Draw a synthetic study and write its curves and oracle."""
    try:
        cfg = study_config(args)
        spec = SyntheticSpec.from_dict(cfg.synthetic, seed=cfg.seed)
        result = simulate(spec, cfg.pipeline())
        directory = out_dir(args)
        save_curves(directory / "curves.csv", result.grid, result.curves)
        truth = dict(result.truth.to_dict(), oracle=result.oracle.to_dict(), config=cfg.to_dict())
        write_json(truth, directory / "truth.json")
        print(f"Simulated {len(result.curves)} curves into {directory}")
    except Exception as e:
        logger.error("simulate failed: %s", e)
        print(f"Error: {e}")
        sys.exit(1)


def cmd_fit(args):
    """Fit template and parameters, write fit.json."""
    try:
        cfg = study_config(args)
        _, _, fit = load_or_fit(args, cfg)
        path = write_json(dict(fit.to_dict(), config=cfg.to_dict()), out_dir(args) / "fit.json")
        print(f"Fit converged after {fit.iterations} iterations, weighted SSE {fit.total_sse:.6g}; wrote {path}")
    except Exception as e:
        logger.error("fit failed: %s", e)
        print(f"Error: {e}")
        sys.exit(1)


def cmd_decompose(args):
    """Decompose the variation of a (possibly stored) fit."""
    try:
        cfg = study_config(args)
        _, _, fit = load_or_fit(args, cfg)
        decomposition = decompose_fit(fit, cfg.pipeline())
        data = {"config": cfg.to_dict(), "decomposition": decomposition.to_dict()}
        swept = sweep(fit, cfg)
        if swept:
            data["gamma_sweep"] = [entry.to_dict() for entry in swept]
        path = write_json(data, out_dir(args) / "decomposition.json")
        shares = ", ".join(f"{k} {v:.2f}%" for k, v in decomposition.rss_per_mode.items())
        print(f"RSS: {shares}; total {decomposition.rss_total:.2f}%; wrote {path}")
    except Exception as e:
        logger.error("decompose failed: %s", e)
        print(f"Error: {e}")
        sys.exit(1)


def cmd_bootstrap(args):
    """Bootstrap the decomposition over families."""
    try:
        cfg = study_config(args)
        if not args.input:
            raise ValueError("--input <csv> is required")
        grid, curves = load_curves(args.input)
        summary = bootstrap(curves, grid, cfg.pipeline(), cfg.boot, cfg.seed, cfg.workers)
        path = write_json({"config": cfg.to_dict(), "bootstrap": summary.to_dict()}, out_dir(args) / "bootstrap.json")
        print(summary.table.to_string(float_format=lambda v: f"{v:.3f}"))
        print(f"{summary.n_failed} failed replicate(s); wrote {path}")
    except Exception as e:
        logger.error("bootstrap failed: %s", e)
        print(f"Error: {e}")
        sys.exit(1)


def cmd_report(args):
    """Full report: fit, decomposition, optional bootstrap and gamma sweep, plots.

    The bootstrap block is produced when --boot, a config ``boot`` or TMV_BOOTSTRAP_B is set.
    """
    try:
        cfg = study_config(args)
        grid, curves, fit = load_or_fit(args, cfg)
        pipeline = cfg.pipeline()
        decomposition = decompose_fit(fit, pipeline)
        summary = None
        if bootstrap_requested(args):
            pinned = replace(pipeline, origin=decomposition.origin.as_dict())
            summary = bootstrap(curves, grid, pinned, cfg.boot, cfg.seed, cfg.workers)
        files = emit_report(
            fit,
            decomposition,
            out_dir(args),
            curves,
            bootstrap=summary,
            config=cfg.to_dict(),
            gamma_sweep=sweep(fit, cfg),
            warp_band=cfg.warp_band,
        )
        print(f"Wrote {files['report']}")
    except Exception as e:
        logger.error("report failed: %s", e)
        print(f"Error: {e}")
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Template Mode of Variation - fit curves and decompose their variation by mode",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Draw a 50-curve synthetic study
  python -m src.workbench.cli simulate --out runs/synthetic --seed 7

  # Fit a degree-4 template
  python -m src.workbench.cli fit --input runs/synthetic/curves.csv --out runs/fit --degree 4

  # Decompose, reusing the stored fit, with a gamma sweep
  python -m src.workbench.cli decompose --input runs/synthetic/curves.csv --fit runs/fit/fit.json --sweep-gamma 0,0.5,1

  # Full report with 200 bootstrap replicates
  python -m src.workbench.cli report --input runs/synthetic/curves.csv --boot 200 --out runs/report

Environment Variables:
  LOG_LEVEL        - Logging level (default INFO)
  TMV_LOG_DIR      - Directory for tmv.log (default ./logs)
  TMV_SEED         - Default seed
  TMV_BOOTSTRAP_B  - Bootstrap replicates; when set, report adds the bootstrap block
  TMV_GAMMA        - Default gamma
  TMV_WORKERS      - Default bootstrap worker processes
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--config", help="Study config JSON")
        sub.add_argument("--out", help="Output directory (default: current directory)")
        sub.add_argument("--seed", type=int, help="Random seed")

    def modelling(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--input", help="Curves CSV (curve_id,t,z[,weight])")
        sub.add_argument("--degree", type=int, help="Template polynomial degree")

    def metric(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--gamma", type=float, help="Weight of the d1 path metric, in [0, 1]")
        sub.add_argument("--sweep-gamma", dest="sweep_gamma", help="Comma-separated gammas, e.g. 0,0.5,1")
        sub.add_argument("--fit", help="Reuse a stored fit.json instead of refitting")

    sim_parser = subparsers.add_parser("simulate", help="Draw a synthetic study")
    common(sim_parser)
    sim_parser.set_defaults(func=cmd_simulate)

    fit_parser = subparsers.add_parser("fit", help="Fit template and per-curve parameters")
    common(fit_parser)
    modelling(fit_parser)
    fit_parser.set_defaults(func=cmd_fit)

    dec_parser = subparsers.add_parser("decompose", help="Decompose variation by mode")
    common(dec_parser)
    modelling(dec_parser)
    metric(dec_parser)
    dec_parser.set_defaults(func=cmd_decompose)

    boot_parser = subparsers.add_parser("bootstrap", help="Bootstrap the decomposition over families")
    common(boot_parser)
    modelling(boot_parser)
    boot_parser.add_argument("--gamma", type=float, help="Weight of the d1 path metric, in [0, 1]")
    boot_parser.add_argument("--boot", type=int, help="Number of replicates")
    boot_parser.add_argument("--workers", type=int, help="Worker processes for replicates (default 1)")
    boot_parser.set_defaults(func=cmd_bootstrap)

    rep_parser = subparsers.add_parser("report", help="JSON report and diagnostic plots")
    common(rep_parser)
    modelling(rep_parser)
    metric(rep_parser)
    rep_parser.add_argument("--boot", type=int, help="Bootstrap replicates (a boot value in --config or TMV_BOOTSTRAP_B also adds the block)")
    rep_parser.add_argument("--workers", type=int, help="Worker processes for replicates (default 1)")
    rep_parser.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        sys.exit(1)
    configure_logging()
    args.func(args)


if __name__ == "__main__":
    main()
