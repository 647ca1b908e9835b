"""Positional base-q encoding of outcome histories into table indices.

The oldest symbol of a window is the most significant digit, so the window
``[0, 1, 0]`` in base 2 reads as the numeral ``010`` and maps to index 2.
"""

from __future__ import annotations

from collections.abc import Sequence

from multigame.errors import DigitOutOfRange, IndexOutOfRange, TableTooLarge

# Largest table length the codec will address (fits signed and unsigned 64-bit).
MAX_INDEXABLE = 2**63 - 1


def table_length(q: int, m: int) -> int:
    """Return ``q**m``, raising :class:`TableTooLarge` past the 64-bit limit."""
    if q < 2:
        raise ValueError(f"base must be >= 2, got {q}")
    if m < 1:
        raise ValueError(f"memory must be >= 1, got {m}")
    length = 1
    for _ in range(m):
        length *= q
        if length > MAX_INDEXABLE:
            raise TableTooLarge(f"{q}^{m} exceeds {MAX_INDEXABLE}")
    return length


def encode_history(digits: Sequence[int], q: int) -> int:
    """Map a window of outcome symbols (oldest first) to a table index."""
    if not digits:
        raise ValueError("history window must hold at least one symbol")
    if len(digits) * q.bit_length() > 63 or q < 2:
        table_length(q, len(digits))
    index = 0
    for d in digits:
        if not 0 <= d < q:
            raise DigitOutOfRange(f"digit {d} outside [0, {q})")
        index = index * q + d
    return index


def decode_index(index: int, q: int, m: int) -> list[int]:
    """Inverse of :func:`encode_history`."""
    length = table_length(q, m)
    if not 0 <= index < length:
        raise IndexOutOfRange(f"index {index} outside [0, {length})")
    digits = [0] * m
    for pos in range(m - 1, -1, -1):
        index, digits[pos] = divmod(index, q)
    return digits
