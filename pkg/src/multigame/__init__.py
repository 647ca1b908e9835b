"""Deterministic tournaments of heterogeneous repeated games."""

from multigame.config import load_tournament_spec, parse_tournament_spec
from multigame.engine import Registry, RunArtifacts, TournamentPlan, run_tournament
from multigame.stats import finalize_dataset, summarize

__all__ = [
    "Registry",
    "RunArtifacts",
    "TournamentPlan",
    "finalize_dataset",
    "load_tournament_spec",
    "parse_tournament_spec",
    "run_tournament",
    "summarize",
]
__version__ = "0.1.0"
