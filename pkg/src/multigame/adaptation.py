"""Between-game adaptation of the population's strategies.

Imitation with an epsilon perturbation of the copied state is a deliberately
simple stand-in for richer plasticity mechanisms; no other model is provided.
"""

from __future__ import annotations

import enum
import random
from collections.abc import Mapping, MutableMapping
from dataclasses import dataclass

from multigame.errors import ParticipantMismatch
from multigame.strategies import Strategy, clone


class AdaptationKind(str, enum.Enum):
    NONE = "none"
    RANDOM_RESET = "random-reset"
    IMITATE_BEST = "imitate-best"


@dataclass(frozen=True)
class AdaptationPolicy:
    kind: AdaptationKind = AdaptationKind.NONE
    p: float = 0.0
    epsilon: float = 0.0
    copy_kind: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", AdaptationKind(self.kind))
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"adaptation probability must be in [0, 1], got {self.p}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"perturbation epsilon must be in [0, 1], got {self.epsilon}")

    @property
    def active(self) -> bool:
        return self.kind is not AdaptationKind.NONE


def best_agent(cumulative_payoffs: Mapping[str, float]) -> str:
    """Highest cumulative payoff; ties go to the lexicographically smallest id."""
    return min(cumulative_payoffs, key=lambda a: (-cumulative_payoffs[a], a))


def adapt_population(
    population: MutableMapping[str, Strategy],
    policy: AdaptationPolicy,
    cumulative_payoffs: Mapping[str, float],
    rng: random.Random,
) -> list[str]:
    """Apply ``policy`` in place and return the ids of agents that changed.

    Agents are visited in ascending id order so the draws are reproducible.
    Without ``copy_kind`` only agents running the same strategy kind as the
    best agent imitate it.
    """
    unknown = sorted(set(cumulative_payoffs) - set(population))
    missing = sorted(set(population) - set(cumulative_payoffs))
    if unknown or missing:
        raise ParticipantMismatch(f"payoff map mismatch: unknown {unknown}, missing {missing}")
    if policy.kind is AdaptationKind.NONE:
        return []

    changed: list[str] = []
    if policy.kind is AdaptationKind.RANDOM_RESET:
        for agent in sorted(population):
            if rng.random() < policy.p:
                population[agent].reset(rng)
                changed.append(agent)
        return changed

    best = best_agent(cumulative_payoffs)
    model = population[best]
    for agent in sorted(population):
        if agent == best:
            continue
        if not policy.copy_kind and population[agent].name != model.name:
            continue
        if rng.random() < policy.p:
            copy = clone(model)
            copy.perturb(policy.epsilon, rng)
            population[agent] = copy
            changed.append(agent)
    return changed
