from __future__ import annotations

from pathlib import Path

import pytest

from multigame.engine import (
    AgentGroup,
    OrderMode,
    PlannedGame,
    PlayerSelection,
    SelectionPolicy,
    TournamentPlan,
)
from multigame.games import make_spec

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

# criterion label -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def simple_plan(games, agents, order=OrderMode.ORDERED_UNKNOWN, seed=0, **kw) -> TournamentPlan:
    """Build a plan from ``(game_type, players, rounds[, selection])`` tuples and agent groups."""
    planned = []
    for g in games:
        gtype, n, rounds, *rest = g
        sel = rest[0] if rest else PlayerSelection(SelectionPolicy.ALL)
        planned.append(PlannedGame(make_spec(gtype, n, rounds), sel))
    groups = tuple(a if isinstance(a, AgentGroup) else AgentGroup(*a) for a in agents)
    return TournamentPlan(tuple(planned), groups, order, seed, **kw)


@pytest.fixture
def configs_dir() -> Path:
    return CONFIGS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0][2:])):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
