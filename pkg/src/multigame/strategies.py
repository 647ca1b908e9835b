"""Game-agnostic strategies.

All strategies share one contract: :meth:`Strategy.generate_choice` picks a
move from the resources a game exposes, and :meth:`Strategy.update_strategy`
stores arbitrary key/value parameters.  The engine additionally calls
:meth:`Strategy.prepare` when a game is created and :meth:`Strategy.observe`
after every round.  Strategies query the game only through ``q`` and the
cooperative choice, which is what lets one instance move between games.
"""

from __future__ import annotations

import copy
import random
from collections import deque
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, ClassVar

from multigame.codec import encode_history, table_length
from multigame.errors import DigitOutOfRange, NoMapping, NotInitialized, TableTooLarge
from multigame.games import GameAxes, GameType, ViewerOutcome, round_half_up

# Total table entries a single BestPlay pool may hold (S * q^m).
MAX_POOL_ENTRIES = 2**24


@dataclass
class StrategyResources:
    """Everything a strategy may consult when choosing a move."""

    game_type: GameType
    q: int
    round_index: int
    prior_outcomes: Sequence[ViewerOutcome]
    own_moves: Sequence[int]
    own_payoffs: Sequence[float]
    cooperative_choice: int
    player_count: int
    upcoming_games: tuple[GameType, ...] | None = None


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: type
    default: Any = None
    minimum: float | None = None
    maximum: float | None = None
    required: bool = False
    help: str = ""

    def describe(self) -> str:
        bounds = []
        if self.minimum is not None:
            bounds.append(f">= {self.minimum}")
        if self.maximum is not None:
            bounds.append(f"<= {self.maximum}")
        text = f"{self.name}: {self.kind.__name__}"
        if bounds:
            text += " " + ", ".join(bounds)
        if not self.required:
            text += f" (default {self.default!r})"
        return text


def _simultaneous(axes: GameAxes) -> bool:
    return axes.move_mode == "simultaneous"


@dataclass(frozen=True)
class StrategyDescriptor:
    """Listing metadata: name, parameters and where the strategy applies."""

    name: str
    summary: str
    params: tuple[ParamSpec, ...] = ()
    applies: Callable[[GameAxes], bool] = _simultaneous
    applicability: str = "any simultaneous-move game"


class Strategy:
    descriptor: ClassVar[StrategyDescriptor]

    def __init__(self) -> None:
        self.resources: dict[str, str] = {}
        self.q: int | None = None

    @property
    def name(self) -> str:
        return self.descriptor.name

    @property
    def label(self) -> str:
        """Name written to statistics; meta-strategies include the active member."""
        return self.name

    def update_strategy(self, key: str, value: str) -> None:
        self.resources[key] = value

    def read(self, key: str) -> str | None:
        return self.resources.get(key)

    def prepare(self, game_type: GameType, q: int, rng: random.Random) -> str | None:
        """Bind to a newly created game; returns a note when state was rebuilt."""
        self.q = q
        return None

    def generate_choice(self, res: StrategyResources, rng: random.Random) -> int:
        if self.q != res.q:
            raise NotInitialized(f"{self.name} prepared for q={self.q}, game has q={res.q}")
        return self._choose(res, rng)

    def _choose(self, res: StrategyResources, rng: random.Random) -> int:
        raise NotImplementedError

    def observe(self, view: ViewerOutcome) -> None:
        pass

    def reset(self, rng: random.Random) -> None:
        """Discard learned state (random-reset adaptation)."""

    def perturb(self, epsilon: float, rng: random.Random) -> None:
        """Redraw learned entries with probability ``epsilon`` each."""

    def params(self) -> dict[str, Any]:
        return {}

    def snapshot(self) -> dict[str, Any]:
        return {"strategy": self.name, "q": self.q, "resources": dict(self.resources)}


class RandomStrategy(Strategy):
    descriptor = StrategyDescriptor("Random", "uniform draw over the game's choices")

    def _choose(self, res: StrategyResources, rng: random.Random) -> int:
        return rng.randrange(res.q)


class FixedChoice(Strategy):
    descriptor = StrategyDescriptor(
        "FixedChoice",
        "always plays the same choice",
        params=(ParamSpec("choice", int, minimum=0, required=True),),
        applicability="games whose choice count exceeds the configured choice",
    )

    def __init__(self, choice: int) -> None:
        super().__init__()
        self.choice = choice

    def _choose(self, res: StrategyResources, rng: random.Random) -> int:
        if self.choice >= res.q:
            raise ValueError(f"fixed choice {self.choice} outside [0, {res.q})")
        return self.choice

    def params(self) -> dict[str, Any]:
        return {"choice": self.choice}

    def snapshot(self) -> dict[str, Any]:
        return {**super().snapshot(), "choice": self.choice}


def tit_for_tat_choice(res: StrategyResources) -> int:
    """Open cooperatively, then echo what the others did last round.

    Two-player games echo the opponent's move.  With more players the echo is
    the rounded mean of the other players' last moves when they are visible,
    and the previous outcome symbol when only aggregates are shown.
    """
    if res.round_index == 0 or not res.prior_outcomes:
        return res.cooperative_choice
    last = res.prior_outcomes[-1]
    others = last.others_moves()
    if others:
        if len(others) == 1:
            return others[0]
        return min(max(round_half_up(sum(others), len(others)), 0), res.q - 1)
    return last.outcome_symbol


class TitForTat(Strategy):
    descriptor = StrategyDescriptor(
        "TitForTat",
        "cooperates first, then mirrors the other players' previous move",
    )

    def _choose(self, res: StrategyResources, rng: random.Random) -> int:
        return tit_for_tat_choice(res)


@dataclass
class BestPlayState:
    m: int
    q: int
    tables: list[list[int]]
    scores: list[int]
    history: deque[int] = field(default_factory=deque)
    # encoded index of a full history; None until the history fills
    index: int | None = None

    def current_index(self) -> int:
        if self.index is None:
            self.index = encode_history(self.history, self.q)
        return self.index

    @property
    def pool_size(self) -> int:
        return len(self.tables)


def check_pool_size(m: int, q: int, pool: int) -> int:
    length = table_length(q, m)
    if length * pool > MAX_POOL_ENTRIES:
        raise TableTooLarge(f"pool of {pool} tables of length {q}^{m} exceeds {MAX_POOL_ENTRIES} entries")
    return length


def best_play_init(m: int, q: int, pool: int, rng: random.Random) -> BestPlayState:
    if pool < 1:
        raise ValueError(f"pool size must be >= 1, got {pool}")
    length = check_pool_size(m, q, pool)
    tables = [[rng.randrange(q) for _ in range(length)] for _ in range(pool)]
    return BestPlayState(m=m, q=q, tables=tables, scores=[0] * pool, history=deque(maxlen=m))


def best_play_choice(state: BestPlayState, rng: random.Random) -> int:
    if len(state.history) < state.m:
        return rng.randrange(state.q)
    # list.index returns the lowest index among ties
    active = state.scores.index(max(state.scores))
    return state.tables[active][state.current_index()]


def best_play_observe(state: BestPlayState, symbol: int) -> None:
    if not 0 <= symbol < state.q:
        raise DigitOutOfRange(f"outcome symbol {symbol} outside [0, {state.q})")
    if len(state.history) == state.m:
        idx = state.current_index()
        for k, table in enumerate(state.tables):
            if table[idx] == symbol:
                state.scores[k] += 1
    state.history.append(symbol)
    state.index = None


def best_play_resize(state: BestPlayState, new_q: int, rng: random.Random) -> bool:
    """Rebuild tables for a new choice count; returns whether anything changed."""
    if new_q < 2:
        raise ValueError(f"choice count must be >= 2, got {new_q}")
    if new_q == state.q:
        return False
    fresh = best_play_init(state.m, new_q, state.pool_size, rng)
    state.q, state.tables, state.scores, state.history = fresh.q, fresh.tables, fresh.scores, fresh.history
    state.index = None
    return True


class BestPlay(Strategy):
    descriptor = StrategyDescriptor(
        "BestPlay",
        "plays the best-scoring lookup table indexed by the last m outcome symbols",
        params=(
            ParamSpec("memory", int, default=3, minimum=1, help="outcome symbols remembered (m)"),
            ParamSpec("pool", int, default=1, minimum=1, help="number of lookup tables (S)"),
        ),
    )

    def __init__(self, memory: int = 3, pool: int = 1) -> None:
        super().__init__()
        self.memory = memory
        self.pool = pool
        self.state: BestPlayState | None = None

    def prepare(self, game_type: GameType, q: int, rng: random.Random) -> str | None:
        old_q = self.q
        self.q = q
        if self.state is None:
            self.state = best_play_init(self.memory, q, self.pool, rng)
            return f"init q={q}"
        if best_play_resize(self.state, q, rng):
            return f"resize q={old_q}->{q}"
        return None

    def _choose(self, res: StrategyResources, rng: random.Random) -> int:
        assert self.state is not None
        return best_play_choice(self.state, rng)

    def observe(self, view: ViewerOutcome) -> None:
        if self.state is None:
            raise NotInitialized("BestPlay observed a round before being prepared")
        best_play_observe(self.state, view.outcome_symbol)

    def reset(self, rng: random.Random) -> None:
        if self.state is not None:
            self.state = best_play_init(self.memory, self.state.q, self.pool, rng)

    def perturb(self, epsilon: float, rng: random.Random) -> None:
        if self.state is None or epsilon <= 0:
            return
        q = self.state.q
        for table in self.state.tables:
            for i in range(len(table)):
                if rng.random() < epsilon:
                    table[i] = rng.randrange(q)

    def params(self) -> dict[str, Any]:
        return {"memory": self.memory, "pool": self.pool}

    def snapshot(self) -> dict[str, Any]:
        snap = {**super().snapshot(), **self.params()}
        if self.state is not None:
            snap.update(
                tables=[list(t) for t in self.state.tables],
                scores=list(self.state.scores),
                history=list(self.state.history),
            )
        return snap


def bag_select(
    bag: Sequence[Strategy],
    mode: str,
    game_type: GameType,
    rng: random.Random,
    mapping: Mapping[GameType, int] | None = None,
) -> int:
    """Index of the member that plays the coming game."""
    if not bag:
        raise ValueError("strategy bag is empty")
    if mode == "fixed":
        if not mapping or game_type not in mapping:
            raise NoMapping(f"no bag member mapped to {game_type.value}")
        return mapping[game_type]
    if mode == "random":
        return rng.randrange(len(bag))
    raise ValueError(f"unknown bag mode {mode!r}")


class StrategyBag(Strategy):
    descriptor = StrategyDescriptor(
        "Bag",
        "holds several strategies and activates one per game",
        params=(
            ParamSpec("members", list, required=True, help="list of {strategy, params}"),
            ParamSpec("mode", str, default="random", help="'fixed' or 'random'"),
            ParamSpec("mapping", dict, default=None, help="game type -> member index (fixed mode)"),
        ),
    )

    def __init__(self, members: Sequence[Strategy], mode: str = "random", mapping: Mapping[GameType, int] | None = None):
        super().__init__()
        self.members = list(members)
        self.mode = mode
        self.mapping = dict(mapping) if mapping else None
        self.active: int | None = None

    @property
    def label(self) -> str:
        if self.active is None:
            return self.name
        return f"{self.name}/{self.members[self.active].label}"

    def prepare(self, game_type: GameType, q: int, rng: random.Random) -> str | None:
        self.q = q
        self.active = bag_select(self.members, self.mode, game_type, rng, self.mapping)
        note = self.members[self.active].prepare(game_type, q, rng)
        picked = f"member {self.active} ({self.members[self.active].label})"
        return f"{picked}: {note}" if note else picked

    def _choose(self, res: StrategyResources, rng: random.Random) -> int:
        assert self.active is not None
        return self.members[self.active].generate_choice(res, rng)

    def observe(self, view: ViewerOutcome) -> None:
        if self.active is None:
            raise NotInitialized("bag observed a round before selecting a member")
        self.members[self.active].observe(view)

    def reset(self, rng: random.Random) -> None:
        for member in self.members:
            member.reset(rng)

    def perturb(self, epsilon: float, rng: random.Random) -> None:
        for member in self.members:
            member.perturb(epsilon, rng)

    def params(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "members": [{"strategy": s.name, "params": s.params()} for s in self.members],
            "mode": self.mode,
        }
        if self.mapping:
            out["mapping"] = {gt.value: i for gt, i in self.mapping.items()}
        return out

    def snapshot(self) -> dict[str, Any]:
        return {
            **super().snapshot(),
            "mode": self.mode,
            "active": self.active,
            "members": [s.snapshot() for s in self.members],
        }


STRATEGIES: dict[str, type[Strategy]] = {
    cls.descriptor.name: cls for cls in (RandomStrategy, FixedChoice, TitForTat, BestPlay, StrategyBag)
}


def param_violations(name: str, params: Mapping[str, Any], path: str = "params") -> list[tuple[str, str]]:
    """Check a strategy's parameters; returns ``(key path, message)`` pairs."""
    cls = STRATEGIES.get(name)
    if cls is None:
        return [("strategy", f"unknown strategy {name!r}; known: {', '.join(sorted(STRATEGIES))}")]
    out: list[tuple[str, str]] = []
    specs = {p.name: p for p in cls.descriptor.params}
    for key in params:
        if key not in specs:
            out.append((f"{path}.{key}", f"unknown parameter for {name}"))
    for p in specs.values():
        if p.name not in params:
            if p.required:
                out.append((f"{path}.{p.name}", f"{name} requires parameter {p.name!r}"))
            continue
        value = params[p.name]
        if p.kind is int and (isinstance(value, bool) or not isinstance(value, int)):
            out.append((f"{path}.{p.name}", f"expected integer, got {value!r}"))
            continue
        if p.kind is not int and value is not None and not isinstance(value, p.kind):
            out.append((f"{path}.{p.name}", f"expected {p.kind.__name__}, got {value!r}"))
            continue
        if p.minimum is not None and value < p.minimum:
            out.append((f"{path}.{p.name}", f"must be >= {p.minimum}, got {value}"))
        if p.maximum is not None and value > p.maximum:
            out.append((f"{path}.{p.name}", f"must be <= {p.maximum}, got {value}"))
    if name == "Bag" and not out:
        out.extend(_bag_violations(params, path))
    return out


def _bag_violations(params: Mapping[str, Any], path: str) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    members = params["members"]
    if not members:
        out.append((f"{path}.members", "bag must hold at least one strategy"))
    for i, member in enumerate(members):
        where = f"{path}.members[{i}]"
        if not isinstance(member, Mapping) or "strategy" not in member:
            out.append((where, "member must be an object with a 'strategy' key"))
            continue
        extra = set(member) - {"strategy", "params"}
        if extra:
            out.append((where, f"unknown keys {sorted(extra)}"))
        out.extend(param_violations(member["strategy"], member.get("params", {}), f"{where}.params"))
    mode = params.get("mode", "random")
    if mode not in ("fixed", "random"):
        out.append((f"{path}.mode", f"mode must be 'fixed' or 'random', got {mode!r}"))
    mapping = params.get("mapping")
    if mode == "fixed" and not mapping:
        out.append((f"{path}.mapping", "fixed mode requires a game type -> member mapping"))
    for gt, idx in (mapping or {}).items():
        if gt not in GameType.__members__:
            out.append((f"{path}.mapping.{gt}", f"unknown game type {gt!r}"))
        if isinstance(idx, bool) or not isinstance(idx, int) or not 0 <= idx < len(members):
            out.append((f"{path}.mapping.{gt}", f"member index {idx!r} out of range"))
    return out


def build_strategy(name: str, params: Mapping[str, Any] | None = None) -> Strategy:
    params = dict(params or {})
    problems = param_violations(name, params)
    if problems:
        raise ValueError("; ".join(f"{k}: {msg}" for k, msg in problems))
    if name == "Bag":
        members = [build_strategy(m["strategy"], m.get("params")) for m in params["members"]]
        mapping = {GameType(k): v for k, v in (params.get("mapping") or {}).items()}
        return StrategyBag(members, params.get("mode", "random"), mapping or None)
    return STRATEGIES[name](**params)


def clone(strategy: Strategy) -> Strategy:
    return copy.deepcopy(strategy)
