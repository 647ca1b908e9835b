"""Game definitions built from a shared set of axes.

Every game here is simultaneous-move, non-spatial and without communication;
they differ in player count, payoff rule and identity visibility.  A game
turns one choice per participant into payoffs plus an outcome symbol, the
public digit that history-based strategies condition on.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType

from multigame.errors import InvalidMove, NotAParticipant, ParticipantMismatch


class GameType(str, enum.Enum):
    IPD = "IPD"
    MG = "MG"
    LPGG = "LPGG"


class Identity(str, enum.Enum):
    KNOWN = "known"
    UNKNOWN = "unknown"
    IRRELEVANT = "irrelevant"


class PayoffMode(str, enum.Enum):
    FIXED_MATRIX = "fixed-matrix"
    FIXED_WINNER = "fixed-winner"
    FORMULA = "formula"


MOVE_MODES = ("simultaneous",)
COMMUNICATION_MODES = ("not-possible",)
TOPOLOGIES = ("non-spatial",)

COOPERATE, DEFECT = 0, 1

DEFAULT_IDENTITY = {
    GameType.IPD: Identity.KNOWN,
    GameType.MG: Identity.IRRELEVANT,
    GameType.LPGG: Identity.UNKNOWN,
}
PAYOFF_MODE = {
    GameType.IPD: PayoffMode.FIXED_MATRIX,
    GameType.MG: PayoffMode.FIXED_WINNER,
    GameType.LPGG: PayoffMode.FORMULA,
}


@dataclass(frozen=True)
class GameAxes:
    player_count: int
    payoff_mode: PayoffMode
    identity: Identity
    move_mode: str = "simultaneous"
    communication: str = "not-possible"
    topology: str = "non-spatial"


@dataclass(frozen=True)
class IPDParams:
    T: float = 5
    R: float = 3
    P: float = 1
    S: float = 0


@dataclass(frozen=True)
class LPGGParams:
    endowment: int = 10
    mpcr: float = 0.5


@dataclass(frozen=True)
class GameSpec:
    game_type: GameType
    axes: GameAxes
    rounds: int
    params: IPDParams | LPGGParams | None = None

    def violations(self) -> list[tuple[str, str]]:
        """Return ``(field, message)`` pairs for every broken game rule."""
        out: list[tuple[str, str]] = []
        n = self.axes.player_count
        if self.rounds < 1:
            out.append(("rounds", f"rounds must be >= 1, got {self.rounds}"))
        if self.axes.move_mode not in MOVE_MODES:
            out.append(("params.moves", f"only simultaneous moves are supported, got {self.axes.move_mode!r}"))
        if self.axes.communication not in COMMUNICATION_MODES:
            out.append(
                ("params.communication", f"communication must be 'not-possible', got {self.axes.communication!r}")
            )
        if self.axes.topology not in TOPOLOGIES:
            out.append(("params.topology", f"only non-spatial topology is supported, got {self.axes.topology!r}"))

        if self.game_type is GameType.IPD:
            p = self.params
            assert isinstance(p, IPDParams)
            if n != 2:
                out.append(("players", f"IPD requires exactly 2 players, got {n}"))
            if not p.T > p.R > p.P > p.S:
                out.append(("params", f"T > R > P > S violated by (T,R,P,S)=({p.T},{p.R},{p.P},{p.S})"))
            if not 2 * p.R > p.T + p.S:
                out.append(("params", f"2R > T + S violated: 2*{p.R} <= {p.T} + {p.S}"))
        elif self.game_type is GameType.MG:
            if n < 3 or n % 2 == 0:
                out.append(("players", f"MG requires odd playerCount >= 3, got {n}"))
        else:
            p = self.params
            assert isinstance(p, LPGGParams)
            if n < 2:
                out.append(("players", f"LPGG requires at least 2 players, got {n}"))
            if p.endowment < 1:
                out.append(("params.endowment", f"endowment must be >= 1, got {p.endowment}"))
            if n >= 1 and not 1 / n < p.mpcr < 1:
                out.append(("params.mpcr", f"mpcr must satisfy 1/{n} < mpcr < 1, got {p.mpcr}"))
        return out

    def validate(self) -> GameSpec:
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(f"{k}: {msg}" for k, msg in problems))
        return self


def make_spec(
    game_type: GameType | str,
    player_count: int,
    rounds: int = 1,
    params: IPDParams | LPGGParams | None = None,
    identity: Identity | str | None = None,
) -> GameSpec:
    """Build and validate a spec with the default axes for ``game_type``."""
    gt = GameType(game_type)
    if params is None and gt is GameType.IPD:
        params = IPDParams()
    elif params is None and gt is GameType.LPGG:
        params = LPGGParams()
    axes = GameAxes(
        player_count=player_count,
        payoff_mode=PAYOFF_MODE[gt],
        identity=Identity(identity) if identity is not None else DEFAULT_IDENTITY[gt],
    )
    return GameSpec(gt, axes, rounds, params).validate()


def num_choices(spec: GameSpec) -> int:
    if spec.game_type is GameType.LPGG:
        assert isinstance(spec.params, LPGGParams)
        return spec.params.endowment + 1
    return 2


def cooperative_choice(spec: GameSpec) -> int:
    """The move a cooperator opens with: Cooperate, side 0, or full contribution."""
    if spec.game_type is GameType.LPGG:
        assert isinstance(spec.params, LPGGParams)
        return spec.params.endowment
    return 0


@dataclass(frozen=True)
class RoundResult:
    payoffs: dict[str, float]
    outcome_symbol: int
    moves: dict[str, int]
    round_index: int


@dataclass(frozen=True)
class ViewerOutcome:
    """What one participant learns about a finished round.

    ``moves`` is ``None`` when identities are irrelevant; otherwise it maps
    agent ids (known) or per-game pseudonyms (unknown) to choices, and
    ``self_key`` is the viewer's own key in that map.
    """

    viewer: str
    round_index: int
    payoff: float
    own_move: int
    outcome_symbol: int
    counts: tuple[int, ...]
    moves: Mapping[str, int] | None = None
    self_key: str | None = None

    def others_moves(self) -> list[int] | None:
        if self.moves is None:
            return None
        return [c for k, c in self.moves.items() if k != self.self_key]


def resolve_round(
    spec: GameSpec,
    moves: Mapping[str, int],
    round_index: int,
    participants: Sequence[str] | None = None,
) -> RoundResult:
    """Resolve one simultaneous round into payoffs and an outcome symbol."""
    q = num_choices(spec)
    if participants is not None:
        missing = [a for a in participants if a not in moves]
        if missing:
            raise InvalidMove(missing[0], "no move submitted")
        extra = sorted(set(moves) - set(participants))
        if extra:
            raise ParticipantMismatch(f"moves from non-participants: {extra}")
    if len(moves) != spec.axes.player_count:
        raise ParticipantMismatch(f"expected {spec.axes.player_count} moves, got {len(moves)}")
    for agent, choice in moves.items():
        if isinstance(choice, bool) or not isinstance(choice, int) or not 0 <= choice < q:
            raise InvalidMove(agent, f"choice {choice!r} outside [0, {q})")

    agents = sorted(moves)
    if spec.game_type is GameType.IPD:
        p = spec.params
        assert isinstance(p, IPDParams)
        a, b = agents
        cell = {
            (COOPERATE, COOPERATE): (p.R, p.R),
            (DEFECT, DEFECT): (p.P, p.P),
            (DEFECT, COOPERATE): (p.T, p.S),
            (COOPERATE, DEFECT): (p.S, p.T),
        }
        pa, pb = cell[moves[a], moves[b]]
        payoffs = {a: float(pa), b: float(pb)}
        # per-viewer symbols are derived in revealed_view
        symbol = moves[a]
    elif spec.game_type is GameType.MG:
        ones = sum(moves.values())
        zeros = len(moves) - ones
        symbol = 0 if zeros < ones else 1
        payoffs = {ag: 1.0 if moves[ag] == symbol else 0.0 for ag in agents}
    else:
        p = spec.params
        assert isinstance(p, LPGGParams)
        total = sum(moves.values())
        n = len(moves)
        payoffs = {ag: p.endowment - moves[ag] + p.mpcr * total for ag in agents}
        symbol = min(max(round_half_up(total, n), 0), p.endowment)
    return RoundResult(
        payoffs=payoffs,
        outcome_symbol=symbol,
        moves={ag: moves[ag] for ag in agents},
        round_index=round_index,
    )


def round_half_up(numerator: int, denominator: int) -> int:
    """Round ``numerator / denominator`` to the nearest integer, halves upward."""
    return (2 * numerator + denominator) // (2 * denominator)


def revealed_view(
    result: RoundResult,
    spec: GameSpec,
    viewer: str,
    pseudonyms: Mapping[str, str] | None = None,
) -> ViewerOutcome:
    if viewer not in result.moves:
        raise NotAParticipant(f"agent {viewer!r} did not play round {result.round_index}")
    return revealed_views(result, spec, pseudonyms, viewers=(viewer,))[viewer]


def revealed_views(
    result: RoundResult,
    spec: GameSpec,
    pseudonyms: Mapping[str, str] | None = None,
    viewers: Sequence[str] | None = None,
) -> dict[str, ViewerOutcome]:
    """Views for several participants, sharing the per-round aggregates."""
    counts = [0] * num_choices(spec)
    for c in result.moves.values():
        counts[c] += 1
    shared_counts = tuple(counts)

    identity = spec.axes.identity
    moves: Mapping[str, int] | None
    if identity is Identity.KNOWN:
        moves = MappingProxyType(dict(result.moves))
        keys = {a: a for a in result.moves}
    elif identity is Identity.UNKNOWN:
        if pseudonyms is None:
            raise ValueError("identity 'unknown' requires per-game pseudonyms")
        moves = MappingProxyType({pseudonyms[a]: c for a, c in result.moves.items()})
        keys = dict(pseudonyms)
    else:
        moves = None
        keys = {}

    ipd = spec.game_type is GameType.IPD
    out = {}
    for viewer in result.moves if viewers is None else viewers:
        if viewer not in result.moves:
            raise NotAParticipant(f"agent {viewer!r} did not play round {result.round_index}")
        if ipd:
            symbol = next(c for a, c in result.moves.items() if a != viewer)
        else:
            symbol = result.outcome_symbol
        out[viewer] = ViewerOutcome(
            viewer=viewer,
            round_index=result.round_index,
            payoff=result.payoffs[viewer],
            own_move=result.moves[viewer],
            outcome_symbol=symbol,
            counts=shared_counts,
            moves=moves,
            self_key=keys.get(viewer),
        )
    return out


@dataclass
class Game:
    """A created game: a spec bound to its participants for one tournament slot."""

    spec: GameSpec
    participants: tuple[str, ...]
    pseudonyms: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.participants) != self.spec.axes.player_count:
            raise ParticipantMismatch(
                f"{self.spec.game_type.value} needs {self.spec.axes.player_count} players, "
                f"got {len(self.participants)}"
            )
        self.participants = tuple(sorted(self.participants))

    @property
    def q(self) -> int:
        return num_choices(self.spec)

    def resolve(self, moves: Mapping[str, int], round_index: int) -> RoundResult:
        return resolve_round(self.spec, moves, round_index, self.participants)

    def view(self, result: RoundResult, viewer: str) -> ViewerOutcome:
        return revealed_view(result, self.spec, viewer, self.pseudonyms or None)

    def views(self, result: RoundResult) -> dict[str, ViewerOutcome]:
        return revealed_views(result, self.spec, self.pseudonyms or None)
