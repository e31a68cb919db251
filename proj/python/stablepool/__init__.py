"""Collateral pool incentives and stablecoin episode simulation."""

from pathlib import Path

from ._core import (
    StablepoolError,
    __version__,
    commitment_digest,
    compute_distribution,
    compute_incentive,
    export_report,
    find_threshold,
    hold_baseline,
    run_episode as _run_episode,
    run_sweep as _run_sweep,
)


def _text(scenario):
    if isinstance(scenario, Path):
        return scenario.read_text(encoding="utf-8")
    return scenario


def run_episode(scenario, seed=None):
    """Run one episode. `scenario` is JSON text or a Path to a scenario file."""
    return _run_episode(_text(scenario), seed)


def run_sweep(scenario, seed=None):
    return _run_sweep(_text(scenario), seed)


__all__ = [
    "StablepoolError",
    "__version__",
    "commitment_digest",
    "compute_distribution",
    "compute_incentive",
    "export_report",
    "find_threshold",
    "hold_baseline",
    "run_episode",
    "run_sweep",
]
