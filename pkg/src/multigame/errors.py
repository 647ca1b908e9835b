"""Exception hierarchy shared by every module of the simulator."""

from __future__ import annotations


class MultigameError(Exception):
    """Base class for all simulator errors."""


# codec
class DigitOutOfRange(MultigameError, ValueError):
    pass


class TableTooLarge(MultigameError, ValueError):
    pass


class IndexOutOfRange(MultigameError, ValueError):
    pass


# games
class InvalidMove(MultigameError, ValueError):
    def __init__(self, agent: str, detail: str = "") -> None:
        self.agent = agent
        msg = f"invalid move for agent {agent!r}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class ParticipantMismatch(MultigameError, ValueError):
    pass


class NotAParticipant(MultigameError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not a participant"


# strategies
class NotInitialized(MultigameError, RuntimeError):
    pass


class NoMapping(MultigameError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "no mapping"


# engine
class InsufficientPlayers(MultigameError, ValueError):
    pass


class UnknownAgentId(MultigameError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown agent id"


class RoundAborted(MultigameError, RuntimeError):
    def __init__(self, game_index: int, round_index: int, agent: str, cause: BaseException) -> None:
        self.game_index = game_index
        self.round_index = round_index
        self.agent = agent
        super().__init__(
            f"game {game_index}, round {round_index}: strategy of agent {agent!r} failed: {cause}"
        )


# stats
class OrderViolation(MultigameError, RuntimeError):
    pass


class IoFailure(MultigameError, OSError):
    pass
