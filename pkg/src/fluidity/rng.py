"""Counter-based deterministic random draws.

Every draw is a pure function of its key: a seed plus a stream label plus
counter coordinates. There is no generator state to thread through callers,
which makes epochs independently regenerable and keeps parallel runs identical
to sequential ones. The mixer is the splitmix64 finalizer chained over the
folded key parts; all arithmetic is 64-bit integer, so results are identical
on every platform.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _fold(part: int | str) -> int:
    if isinstance(part, bool):
        raise TypeError("bool is not a valid key part")
    if isinstance(part, int):
        return part & _MASK64
    if isinstance(part, str):
        h = _FNV_OFFSET
        for byte in part.encode("utf-8"):
            h = ((h ^ byte) * _FNV_PRIME) & _MASK64
        return h
    raise TypeError(f"key parts must be int or str, got {type(part).__name__}")


def draw_u64(*key: int | str) -> int:
    """64-bit draw for the given key, uniform over [0, 2**64)."""
    h = 0
    for part in key:
        h = _splitmix64(h ^ _fold(part))
    return _splitmix64(h)


def unit(*key: int | str) -> float:
    """Draw in the half-open interval [0, 1)."""
    return draw_u64(*key) / 2.0**64


def unit_open_closed(*key: int | str) -> float:
    """Draw in the interval (0, 1]; never returns exactly zero."""
    return (draw_u64(*key) + 1) / 2.0**64
