"""Tournament description files: parsing, validation and serialization.

A description is a JSON document checked in two passes.  The structural pass
uses the shipped JSON Schema (strict: unknown keys are errors).  The semantic
pass checks the game rules, strategy parameters, table sizes and player
selections.  Every diagnostic carries a location, either ``line L, column C``
for syntax errors or a key path such as ``games[1].params.T``.
"""

from __future__ import annotations

import json
from collections.abc import Collection, Iterable, Mapping
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema

from multigame.adaptation import AdaptationPolicy
from multigame.errors import MultigameError, TableTooLarge
from multigame.engine import (
    AgentGroup,
    OrderMode,
    OutputOptions,
    PlannedGame,
    PlayerSelection,
    Registry,
    SelectionPolicy,
    TournamentPlan,
    assign_agent_ids,
)
from multigame.games import (
    PAYOFF_MODE,
    DEFAULT_IDENTITY,
    GameAxes,
    GameSpec,
    GameType,
    Identity,
    IPDParams,
    LPGGParams,
    num_choices,
)
from multigame.strategies import check_pool_size, param_violations

SPEC_VERSION = 1
AXIS_KEYS = {"identity", "moves", "communication", "topology"}


@dataclass(frozen=True)
class Diagnostic:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


class ConfigError(MultigameError, ValueError):
    def __init__(self, diagnostics: Iterable[Diagnostic]) -> None:
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(map(str, self.diagnostics)))


@lru_cache(maxsize=1)
def load_schema() -> dict[str, Any]:
    text = resources.files("multigame").joinpath("schema/tournament.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def key_path(parts: Iterable[Any]) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<document>"


def _schema_diagnostics(doc: Any) -> list[Diagnostic]:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    out = []
    for err in errors:
        path = list(err.absolute_path)
        if err.validator == "additionalProperties":
            # name the offending key itself
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            out.extend(Diagnostic(key_path([*path, k]), "unknown key") for k in extra)
        else:
            out.append(Diagnostic(key_path(path), err.message))
    return out


def _game_spec(i: int, raw: Mapping[str, Any], population: int) -> tuple[PlannedGame, list[Diagnostic]]:
    where = f"games[{i}]"
    diags: list[Diagnostic] = []
    gt = GameType(raw["type"])
    params = dict(raw.get("params", {}))
    sel_raw = raw.get("players", {"policy": "all"})
    policy = SelectionPolicy(sel_raw["policy"])
    selection = PlayerSelection(policy, tuple(sel_raw.get("ids", ())), sel_raw.get("count"))
    if policy is SelectionPolicy.FIXED_LIST:
        if "ids" not in sel_raw:
            diags.append(Diagnostic(f"{where}.players.ids", "fixed-list selection requires 'ids'"))
        if "count" in sel_raw:
            diags.append(Diagnostic(f"{where}.players.count", "'count' is only valid with random-of-count"))
        if len(set(selection.ids)) != len(selection.ids):
            diags.append(Diagnostic(f"{where}.players.ids", "duplicate agent ids"))
    elif policy is SelectionPolicy.RANDOM_OF_COUNT:
        if "count" not in sel_raw:
            diags.append(Diagnostic(f"{where}.players.count", "random-of-count selection requires 'count'"))
            selection = PlayerSelection(policy, (), 0)
        if "ids" in sel_raw:
            diags.append(Diagnostic(f"{where}.players.ids", "'ids' is only valid with fixed-list"))
    elif set(sel_raw) - {"policy"}:
        diags.append(Diagnostic(f"{where}.players", "'all' selection takes no other keys"))

    axes = GameAxes(
        player_count=selection.player_count(population),
        payoff_mode=PAYOFF_MODE[gt],
        identity=Identity(params.get("identity", DEFAULT_IDENTITY[gt].value)),
        move_mode=params.get("moves", "simultaneous"),
        communication=params.get("communication", "not-possible"),
        topology=params.get("topology", "non-spatial"),
    )
    game_params: IPDParams | LPGGParams | None = None
    if gt is GameType.IPD:
        game_params = IPDParams(**{k: v for k, v in params.items() if k in ("T", "R", "P", "S")})
    elif gt is GameType.LPGG:
        game_params = LPGGParams(**{k: v for k, v in params.items() if k in ("endowment", "mpcr")})
    spec = GameSpec(gt, axes, raw["rounds"], game_params)
    for field_name, message in spec.violations():
        diags.append(Diagnostic(f"{where}.{field_name}", message))
    return PlannedGame(spec, selection), diags


def _reachable_games(plan: TournamentPlan) -> dict[str, list[int]]:
    """For every agent, the indices of games it may be selected for."""
    reach: dict[str, list[int]] = {a: [] for a in plan.agent_ids()}
    for gi, pg in enumerate(plan.games):
        if pg.selection.policy is SelectionPolicy.FIXED_LIST:
            targets: Collection[str] = [a for a in pg.selection.ids if a in reach]
        else:
            targets = list(reach)
        for a in targets:
            reach[a].append(gi)
    return reach


def _strategy_fit(name: str, params: Mapping[str, Any], games: list[PlannedGame], where: str) -> list[Diagnostic]:
    """Check that a strategy can play every game it may be assigned to."""
    out: list[Diagnostic] = []
    if name == "Bag":
        mode = params.get("mode", "random")
        mapping = params.get("mapping") or {}
        for i, member in enumerate(params["members"]):
            if mode == "fixed":
                mine = [g for g in games if mapping.get(g.spec.game_type.value) == i]
            else:
                mine = games
            out.extend(_strategy_fit(member["strategy"], member.get("params", {}), mine, f"{where}.members[{i}].params"))
        if mode == "fixed":
            for gt in sorted({g.spec.game_type.value for g in games} - set(mapping)):
                out.append(Diagnostic(f"{where}.mapping", f"no bag member mapped to {gt}"))
        return out
    for q in sorted({num_choices(g.spec) for g in games}):
        if name == "FixedChoice" and params["choice"] >= q:
            out.append(Diagnostic(f"{where}.choice", f"choice {params['choice']} outside [0, {q}) of a game it may play"))
        if name == "BestPlay":
            try:
                check_pool_size(params.get("memory", 3), q, params.get("pool", 1))
            except TableTooLarge as exc:
                out.append(Diagnostic(where, f"BestPlay tables too large for q={q}: {exc}"))
    return out


def validate_plan_against_registry(plan: TournamentPlan, registry: Registry | Collection[str]) -> list[str]:
    """Check every game's player selection against a population; returns violations."""
    ids = registry.ids() if isinstance(registry, Registry) else list(registry)
    known = set(ids)
    out: list[str] = []
    for i, pg in enumerate(plan.games):
        where = f"games[{i}].players"
        need = pg.spec.axes.player_count
        sel = pg.selection
        if sel.policy is SelectionPolicy.FIXED_LIST:
            for a in sel.ids:
                if a not in known:
                    out.append(f"{where}.ids: unknown agent id {a!r}")
        elif need > len(ids):
            out.append(f"{where}: {pg.spec.game_type.value} needs {need} players, population has {len(ids)}")
        elif sel.policy is SelectionPolicy.ALL and need != len(ids):
            out.append(f"{where}: 'all' selects {len(ids)} players, game fixes {need}")
    return out


def plan_from_document(doc: Any) -> TournamentPlan:
    """Validate a decoded document and build the plan."""
    diags = _schema_diagnostics(doc)
    if diags:
        raise ConfigError(diags)

    groups = []
    for i, raw in enumerate(doc["agents"]):
        params = raw.get("params", {})
        for path, message in param_violations(raw["strategy"], params, "params"):
            diags.append(Diagnostic(f"agents[{i}].{path}", message))
        groups.append(AgentGroup(raw["count"], raw["strategy"], params))
    population = sum(g.count for g in groups)

    games = []
    for i, raw in enumerate(doc["games"]):
        planned, game_diags = _game_spec(i, raw, population)
        games.append(planned)
        diags.extend(game_diags)

    adapt_raw = doc.get("adaptation", {"kind": "none"})
    out_raw = doc.get("output", {})
    plan = TournamentPlan(
        games=tuple(games),
        agents=tuple(groups),
        order=OrderMode(doc.get("order", OrderMode.ORDERED_UNKNOWN.value)),
        seed=doc.get("seed", 0),
        adaptation=AdaptationPolicy(
            adapt_raw["kind"], adapt_raw.get("p", 0.0), adapt_raw.get("epsilon", 0.0), adapt_raw.get("copy_kind", False)
        ),
        output=OutputOptions(out_raw.get("dir", "out"), out_raw.get("summary", True)),
    )
    diags.extend(Diagnostic(*v.split(": ", 1)) for v in validate_plan_against_registry(plan, plan.agent_ids()))

    if not diags:
        reach = _reachable_games(plan)
        ids = assign_agent_ids(plan.agents)
        for i, group in enumerate(plan.agents):
            idx = sorted({gi for a, g in ids if g is group for gi in reach[a]})
            diags.extend(_strategy_fit(group.strategy, group.params, [plan.games[g] for g in idx], f"agents[{i}].params"))
    if diags:
        raise ConfigError(diags)
    return plan


def parse_tournament_spec(text: str) -> TournamentPlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([Diagnostic(f"line {exc.lineno}, column {exc.colno}", f"syntax error: {exc.msg}")]) from None
    return plan_from_document(doc)


def load_tournament_spec(path: str) -> TournamentPlan:
    with open(path, encoding="utf-8") as fh:
        return parse_tournament_spec(fh.read())


def plan_to_document(plan: TournamentPlan) -> dict[str, Any]:
    games = []
    for pg in plan.games:
        spec = pg.spec
        params: dict[str, Any] = {}
        if isinstance(spec.params, IPDParams):
            params.update(T=spec.params.T, R=spec.params.R, P=spec.params.P, S=spec.params.S)
        elif isinstance(spec.params, LPGGParams):
            params.update(endowment=spec.params.endowment, mpcr=spec.params.mpcr)
        params.update(
            identity=spec.axes.identity.value,
            moves=spec.axes.move_mode,
            communication=spec.axes.communication,
            topology=spec.axes.topology,
        )
        players: dict[str, Any] = {"policy": pg.selection.policy.value}
        if pg.selection.policy is SelectionPolicy.FIXED_LIST:
            players["ids"] = list(pg.selection.ids)
        elif pg.selection.policy is SelectionPolicy.RANDOM_OF_COUNT:
            players["count"] = pg.selection.count
        games.append({"type": spec.game_type.value, "rounds": spec.rounds, "players": players, "params": params})
    return {
        "specVersion": SPEC_VERSION,
        "seed": plan.seed,
        "order": plan.order.value,
        "agents": [{"count": g.count, "strategy": g.strategy, "params": g.params} for g in plan.agents],
        "games": games,
        "adaptation": {
            "kind": plan.adaptation.kind.value,
            "p": plan.adaptation.p,
            "epsilon": plan.adaptation.epsilon,
            "copy_kind": plan.adaptation.copy_kind,
        },
        "output": {"dir": plan.output.dir, "summary": plan.output.summary},
    }


def dump_tournament_spec(plan: TournamentPlan) -> str:
    return json.dumps(plan_to_document(plan), indent=2) + "\n"
