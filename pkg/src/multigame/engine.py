"""Tournament orchestration.

The tournament master resolves the game order and, for each game, hands a
:class:`GameMaster` the registry of agents.  The game master selects players,
creates the game, runs its rounds (start round, make move, generate outcome,
update strategy) and collects statistics.  Adaptation runs between games.
Every stage is appended to an :class:`EventTrace`.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import random
import time
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from multigame import rng as rngs
from multigame.adaptation import AdaptationPolicy, adapt_population
from multigame.errors import InsufficientPlayers, MultigameError, RoundAborted, UnknownAgentId
from multigame.games import Game, GameSpec, GameType, Identity, RoundResult, ViewerOutcome, cooperative_choice, num_choices
from multigame.stats import RECORD_HEADER, StatsRecord, StatsSink, format_real, record_row
from multigame.strategies import Strategy, StrategyResources, build_strategy

log = logging.getLogger(__name__)


class OrderMode(str, enum.Enum):
    ORDERED_KNOWN = "ordered-known"
    ORDERED_UNKNOWN = "ordered-unknown"
    RANDOM = "random"


class SelectionPolicy(str, enum.Enum):
    ALL = "all"
    FIXED_LIST = "fixed-list"
    RANDOM_OF_COUNT = "random-of-count"


@dataclass(frozen=True)
class PlayerSelection:
    policy: SelectionPolicy = SelectionPolicy.ALL
    ids: tuple[str, ...] = ()
    count: int | None = None

    def player_count(self, population_size: int) -> int:
        if self.policy is SelectionPolicy.ALL:
            return population_size
        if self.policy is SelectionPolicy.FIXED_LIST:
            return len(self.ids)
        assert self.count is not None
        return self.count


@dataclass(frozen=True)
class AgentGroup:
    count: int
    strategy: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class PlannedGame:
    spec: GameSpec
    selection: PlayerSelection = PlayerSelection()


@dataclass(frozen=True)
class OutputOptions:
    dir: str = "out"
    summary: bool = True


@dataclass(frozen=True)
class TournamentPlan:
    games: tuple[PlannedGame, ...]
    agents: tuple[AgentGroup, ...]
    order: OrderMode = OrderMode.ORDERED_UNKNOWN
    seed: int = 0
    adaptation: AdaptationPolicy = AdaptationPolicy()
    output: OutputOptions = OutputOptions()

    @property
    def population_size(self) -> int:
        return sum(g.count for g in self.agents)

    def agent_ids(self) -> list[str]:
        return [agent_id for agent_id, _ in assign_agent_ids(self.agents)]


def assign_agent_ids(groups: Sequence[AgentGroup]) -> list[tuple[str, AgentGroup]]:
    """Ids ``a1..aN`` in config order, zero-padded so they sort numerically."""
    total = sum(g.count for g in groups)
    width = len(str(total))
    out = []
    n = 0
    for group in groups:
        for _ in range(group.count):
            n += 1
            out.append((f"a{n:0{width}d}", group))
    return out


@dataclass
class Agent:
    agent_id: str
    strategy: Strategy
    available: bool = True


class Registry:
    """The population: agent ids, their strategies and availability."""

    def __init__(self, strategies: Mapping[str, Strategy]) -> None:
        self.agents: dict[str, Agent] = {a: Agent(a, s) for a, s in sorted(strategies.items())}

    @classmethod
    def from_plan(cls, plan: TournamentPlan) -> Registry:
        return cls({a: build_strategy(g.strategy, g.params) for a, g in assign_agent_ids(plan.agents)})

    def __len__(self) -> int:
        return len(self.agents)

    def __contains__(self, agent_id: object) -> bool:
        return agent_id in self.agents

    def ids(self) -> list[str]:
        return list(self.agents)

    def strategy(self, agent_id: str) -> Strategy:
        try:
            return self.agents[agent_id].strategy
        except KeyError:
            raise UnknownAgentId(f"unknown agent id {agent_id!r}") from None

    def available(self) -> list[str]:
        return [a for a, ag in self.agents.items() if ag.available]

    def population(self) -> dict[str, Strategy]:
        return {a: ag.strategy for a, ag in self.agents.items()}

    def replace(self, population: Mapping[str, Strategy]) -> None:
        for a, s in population.items():
            self.agents[a].strategy = s

    def set_available(self, ids: Iterable[str], flag: bool) -> None:
        for a in ids:
            self.agents[a].available = flag

    def snapshot(self) -> dict[str, dict[str, Any]]:
        return {a: ag.strategy.snapshot() for a, ag in self.agents.items()}


class Stage(str, enum.Enum):
    START_TOURNAMENT = "StartTournament"
    CREATE_GAME = "CreateGame"
    START_ROUND = "StartRound"
    MAKE_MOVE = "MakeMove"
    GENERATE_OUTCOME = "GenerateOutcome"
    UPDATE_STRATEGY = "UpdateStrategy"
    COLLECT_STATISTICS = "CollectStatistics"
    ADAPT_STRATEGY = "AdaptStrategy"
    END_TOURNAMENT = "EndTournament"


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    stage: Stage
    game_index: int | None = None
    round_index: int | None = None
    agent_id: str | None = None
    detail: dict[str, Any] | None = None
    timestamp: float = 0.0

    def to_dict(self, timestamp: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {"seq": self.seq, "stage": self.stage.value}
        if self.game_index is not None:
            out["game"] = self.game_index
        if self.round_index is not None:
            out["round"] = self.round_index
        if self.agent_id is not None:
            out["agent"] = self.agent_id
        if self.detail:
            out["detail"] = self.detail
        if timestamp:
            out["ts"] = self.timestamp
        return out


class EventTrace:
    """Append-only stage log.  With ``enabled=False`` events are only counted."""

    def __init__(self, enabled: bool = True) -> None:
        self.enabled = enabled
        self.events: list[TraceEvent] = []
        self.count = 0

    def emit(
        self,
        stage: Stage,
        game: int | None = None,
        round_index: int | None = None,
        agent: str | None = None,
        **detail: Any,
    ) -> None:
        if self.enabled:
            self.events.append(TraceEvent(self.count, stage, game, round_index, agent, detail or None, time.time()))
        self.count += 1

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def canonical(self) -> list[dict[str, Any]]:
        """Events without wall-clock timestamps, for reproducibility checks."""
        return [e.to_dict(timestamp=False) for e in self.events]


def check_stage_order(events: Sequence[TraceEvent]) -> list[str]:
    """Return every departure from the lifecycle order; empty when the trace is valid.

    Expected shape: StartTournament, then per game CreateGame, rounds of
    StartRound / MakeMove x N / GenerateOutcome / UpdateStrategy x N with
    consecutive round numbers, CollectStatistics, and optionally
    AdaptStrategy before the next game; EndTournament last.
    """
    problems: list[str] = []
    i = 0

    def expect(stage: Stage, game: int | None = None, rnd: int | None = None) -> TraceEvent | None:
        nonlocal i
        if i >= len(events):
            problems.append(f"trace ended, expected {stage.value}")
            return None
        ev = events[i]
        if ev.stage is not stage:
            problems.append(f"event {ev.seq}: expected {stage.value}, got {ev.stage.value}")
            return None
        if game is not None and ev.game_index != game:
            problems.append(f"event {ev.seq}: {stage.value} for game {ev.game_index}, expected {game}")
        if rnd is not None and ev.round_index != rnd:
            problems.append(f"event {ev.seq}: {stage.value} for round {ev.round_index}, expected {rnd}")
        i += 1
        return ev

    def peek() -> Stage | None:
        return events[i].stage if i < len(events) else None

    if expect(Stage.START_TOURNAMENT) is None:
        return problems
    games_seen = 0
    while peek() is Stage.CREATE_GAME:
        created = expect(Stage.CREATE_GAME)
        assert created is not None
        g = created.game_index
        players = len((created.detail or {}).get("players", ()))
        rnd = 0
        while peek() is Stage.START_ROUND:
            expect(Stage.START_ROUND, g, rnd)
            for _ in range(players):
                expect(Stage.MAKE_MOVE, g, rnd)
            expect(Stage.GENERATE_OUTCOME, g, rnd)
            for _ in range(players):
                expect(Stage.UPDATE_STRATEGY, g, rnd)
            if problems:
                return problems
            rnd += 1
        if rnd == 0:
            problems.append(f"game {g} has no rounds")
        if expect(Stage.COLLECT_STATISTICS, g) is None:
            return problems
        games_seen += 1
        if peek() is Stage.ADAPT_STRATEGY:
            expect(Stage.ADAPT_STRATEGY)
            if peek() is not Stage.CREATE_GAME:
                problems.append("AdaptStrategy is not followed by another game")
                return problems
    if games_seen == 0:
        problems.append("trace contains no games")
    expect(Stage.END_TOURNAMENT)
    if i < len(events):
        problems.append(f"{len(events) - i} events after EndTournament")
    return problems


def resolve_game_order(plan: TournamentPlan, rng: random.Random) -> list[PlannedGame]:
    games = list(plan.games)
    if plan.order is OrderMode.RANDOM:
        rng.shuffle(games)
    return games


def select_players(
    registry: Registry,
    selection: PlayerSelection,
    needed: int,
    rng: random.Random,
) -> list[str]:
    """Pick the game's participants and mark them unavailable."""
    available = registry.available()
    if selection.policy is SelectionPolicy.ALL:
        chosen = available
        if len(chosen) != needed:
            raise InsufficientPlayers(f"game needs {needed} players, population has {len(chosen)} available")
    elif selection.policy is SelectionPolicy.FIXED_LIST:
        for a in selection.ids:
            if a not in registry:
                raise UnknownAgentId(f"unknown agent id {a!r}")
        busy = [a for a in selection.ids if a not in available]
        if busy:
            raise InsufficientPlayers(f"agents {busy} are not available")
        chosen = list(selection.ids)
    else:
        count = selection.count or 0
        if count > len(available):
            raise InsufficientPlayers(f"need {count} players, only {len(available)} available")
        chosen = rng.sample(available, count)
    if len(chosen) != needed:
        raise InsufficientPlayers(f"game needs {needed} players, selection yields {len(chosen)}")
    chosen = sorted(chosen)
    registry.set_available(chosen, False)
    return chosen


def tournament_id(plan: TournamentPlan, seed: int) -> str:
    """Stable short id derived from the plan contents and the seed."""
    payload = json.dumps([repr(plan.games), repr(plan.agents), plan.order.value, seed, repr(plan.adaptation)])
    return "t" + hashlib.sha256(payload.encode()).hexdigest()[:12]


class GameMaster:
    """Runs one game: selection, creation, rounds and statistics collection."""

    def __init__(
        self,
        game_index: int,
        planned: PlannedGame,
        registry: Registry,
        game_seed: int,
        trace: EventTrace,
        sink: StatsSink,
        tournament: str,
        cumulative: dict[str, float],
        upcoming: tuple[GameType, ...] | None = None,
    ) -> None:
        self.index = game_index
        self.spec = planned.spec
        self.selection = planned.selection
        self.registry = registry
        self.seed = game_seed
        self.trace = trace
        self.sink = sink
        self.tournament = tournament
        self.cumulative = cumulative
        self.upcoming = upcoming
        self.q = num_choices(self.spec)
        self.coop = cooperative_choice(self.spec)
        self.game: Game | None = None
        self.players: list[str] = []
        self.rngs: dict[str, random.Random] = {}
        self.views: dict[str, list[ViewerOutcome]] = {}
        self.moves: dict[str, list[int]] = {}
        self.payoffs: dict[str, list[float]] = {}
        self.records = 0

    def create_game(self) -> Game:
        needed = self.spec.axes.player_count
        self.players = select_players(self.registry, self.selection, needed, rngs.stream(self.seed, "select"))
        pseudonyms: dict[str, str] = {}
        if self.spec.axes.identity is Identity.UNKNOWN:
            aliases = [f"p{i}" for i in range(needed)]
            rngs.stream(self.seed, "pseudonyms").shuffle(aliases)
            pseudonyms = dict(zip(self.players, aliases))
        self.game = Game(self.spec, tuple(self.players), pseudonyms)
        notes = {}
        for a in self.players:
            self.rngs[a] = rngs.stream(self.seed, "agent", a)
            note = self.registry.strategy(a).prepare(self.spec.game_type, self.q, self.rngs[a])
            if note:
                notes[a] = note
            self.views[a], self.moves[a], self.payoffs[a] = [], [], []
        detail: dict[str, Any] = {
            "game_type": self.spec.game_type.value,
            "rounds": self.spec.rounds,
            "q": self.q,
            "players": list(self.players),
        }
        if notes:
            detail["prepared"] = notes
        self.trace.emit(Stage.CREATE_GAME, self.index, **detail)
        return self.game

    def play_round(self, round_index: int) -> RoundResult:
        assert self.game is not None
        g = self.index
        self.trace.emit(Stage.START_ROUND, g, round_index)
        moves: dict[str, int] = {}
        for a in self.players:
            strategy = self.registry.strategy(a)
            res = StrategyResources(
                game_type=self.spec.game_type,
                q=self.q,
                round_index=round_index,
                prior_outcomes=self.views[a],
                own_moves=self.moves[a],
                own_payoffs=self.payoffs[a],
                cooperative_choice=self.coop,
                player_count=len(self.players),
                upcoming_games=self.upcoming,
            )
            try:
                moves[a] = strategy.generate_choice(res, self.rngs[a])
            except Exception as exc:
                raise RoundAborted(g, round_index, a, exc) from exc
            self.trace.emit(Stage.MAKE_MOVE, g, round_index, a, move=moves[a])

        try:
            result = self.game.resolve(moves, round_index)
        except MultigameError as exc:
            raise RoundAborted(g, round_index, getattr(exc, "agent", "?"), exc) from exc
        self.trace.emit(Stage.GENERATE_OUTCOME, g, round_index, outcome_symbol=result.outcome_symbol)

        records = []
        views = self.game.views(result)
        for a in self.players:
            strategy = self.registry.strategy(a)
            view = views[a]
            try:
                strategy.observe(view)
            except Exception as exc:
                raise RoundAborted(g, round_index, a, exc) from exc
            payoff = result.payoffs[a]
            self.views[a].append(view)
            self.moves[a].append(moves[a])
            self.payoffs[a].append(payoff)
            self.cumulative[a] += payoff
            self.trace.emit(Stage.UPDATE_STRATEGY, g, round_index, a, payoff=payoff)
            records.append(
                StatsRecord(
                    self.tournament,
                    g,
                    self.spec.game_type.value,
                    round_index,
                    a,
                    strategy.label,
                    moves[a],
                    payoff,
                    self.cumulative[a],
                )
            )
        self.sink.record_round(records)
        self.records += len(records)
        return result

    def collect_statistics(self) -> None:
        self.registry.set_available(self.players, True)
        totals = {a: format_real(sum(self.payoffs[a])) for a in self.players}
        self.trace.emit(Stage.COLLECT_STATISTICS, self.index, records=self.records, totals=totals)

    def run(self) -> None:
        self.create_game()
        try:
            for r in range(self.spec.rounds):
                self.play_round(r)
        finally:
            self.registry.set_available(self.players, True)
        self.collect_statistics()


@dataclass
class RunArtifacts:
    tournament_id: str
    seed: int
    order: list[GameType]
    sink: StatsSink
    trace: EventTrace
    final_population: dict[str, dict[str, Any]]
    game_snapshots: list[dict[str, dict[str, Any]]] = field(default_factory=list)

    @property
    def records(self) -> list[StatsRecord]:
        return self.sink.records

    def records_csv(self) -> str:
        lines = [",".join(row) for row in map(record_row, self.records)]
        return "\n".join([",".join(RECORD_HEADER), *lines]) + "\n"

    def totals(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for r in self.records:
            out[r.agent_id] = r.cumulative_payoff
        return out


def run_tournament(
    plan: TournamentPlan,
    registry: Registry | None = None,
    *,
    seed: int | None = None,
    seed_source: str = "config",
    trace: bool = True,
    snapshots: bool = True,
) -> RunArtifacts:
    """Run every game of ``plan`` and return records, trace and final state.

    ``seed`` overrides the plan's seed.  ``trace=False`` skips storing events
    and ``snapshots=False`` skips the per-game population snapshots, both to
    save memory on long runs.
    """
    master = plan.seed if seed is None else seed
    if seed is not None:
        seed_source = "override"
    registry = registry if registry is not None else Registry.from_plan(plan)
    tid = tournament_id(plan, master)
    events = EventTrace(enabled=trace)
    sink = StatsSink()
    cumulative = {a: 0.0 for a in registry.ids()}

    order = resolve_game_order(plan, rngs.stream(master, "order"))
    types = [pg.spec.game_type for pg in order]
    events.emit(
        Stage.START_TOURNAMENT,
        tournament_id=tid,
        seed=master,
        seed_source=seed_source,
        order=plan.order.value,
        games=[t.value for t in types],
        agents=registry.ids(),
    )
    log.info("tournament %s: %d games, %d agents, seed %d", tid, len(order), len(registry), master)

    artifacts = RunArtifacts(tid, master, types, sink, events, {})
    for g, planned in enumerate(order):
        upcoming = tuple(types[g + 1 :]) if plan.order is OrderMode.ORDERED_KNOWN else None
        gm = GameMaster(g, planned, registry, rngs.derive_seed(master, "game", g), events, sink, tid, cumulative, upcoming)
        gm.run()
        if snapshots:
            artifacts.game_snapshots.append(registry.snapshot())
        if plan.adaptation.active and g + 1 < len(order):
            population = registry.population()
            changed = adapt_population(population, plan.adaptation, cumulative, rngs.stream(master, "adapt", g))
            registry.replace(population)
            events.emit(Stage.ADAPT_STRATEGY, g, policy=plan.adaptation.kind.value, changed=changed)

    events.emit(Stage.END_TOURNAMENT, records=len(sink), totals={a: format_real(v) for a, v in cumulative.items()})
    artifacts.final_population = registry.snapshot()
    return artifacts
