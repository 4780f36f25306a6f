from __future__ import annotations

WORD_BITS = 32
WORD_MASK = 0xFFFFFFFF
WORD_SIGN_BIT = 0x80000000
WORD_MIN = -0x80000000
WORD_MAX = 0x7FFFFFFF


def wrap(value: int) -> int:
    """Reduce an arbitrary integer to a signed 32-bit word."""
    w = value & WORD_MASK
    if w & WORD_SIGN_BIT:
        return w - (WORD_MASK + 1)
    return w


def unsigned(value: int) -> int:
    return value & WORD_MASK


def is_word(value: int) -> bool:
    return WORD_MIN <= value <= WORD_MAX
