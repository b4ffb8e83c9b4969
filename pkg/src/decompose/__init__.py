"""Variance decomposition along the modes of variation, and its bootstrap."""
from .bootstrap import BootstrapSummary, PipelineConfig, bootstrap, decompose_fit, run_pipeline, summarize
from .variation import Decomposition, decompose, gamma_sweep, rss_shares, sse

__all__ = [
    "BootstrapSummary",
    "Decomposition",
    "PipelineConfig",
    "bootstrap",
    "decompose",
    "decompose_fit",
    "gamma_sweep",
    "rss_shares",
    "run_pipeline",
    "sse",
    "summarize",
]
