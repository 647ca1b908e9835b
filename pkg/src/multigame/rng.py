"""Seed derivation for independent, reproducible random streams.

Every random draw in a tournament comes from a ``random.Random`` whose seed
is derived from the master seed and a path of labels::

    master seed
      ├── ("order",)                        game-order shuffle
      ├── ("init", agent_id)                initial strategy state
      ├── ("adapt", game_index)             adaptation after a game
      └── ("game", game_index) -> game seed
            ├── ("select",)                 player selection
            ├── ("pseudonyms",)             per-game aliases
            └── ("agent", agent_id)         the agent's draws in that game

Streams never share state, so adding a game or an agent leaves the draws of
every other stream untouched.
"""

from __future__ import annotations

import hashlib
import random

SEED_MASK = 2**64 - 1


def derive_seed(parent: int, *labels: object) -> int:
    """Hash a parent seed and a label path into a 64-bit child seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(parent & SEED_MASK).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode())
    return int.from_bytes(h.digest(), "big")


def stream(parent: int, *labels: object) -> random.Random:
    return random.Random(derive_seed(parent, *labels))
