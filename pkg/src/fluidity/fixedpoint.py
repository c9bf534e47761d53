"""Micro-unit fixed point helpers for exact current accounting.

Current amounts are held as integers counting millionths of a current unit.
Integer arithmetic keeps the ledger conservation identity exact; floats only
appear at the API boundary.
"""

from __future__ import annotations

import math

from .errors import InvalidInput

#: Micro-units per current unit.
MICRO = 1_000_000


def to_micro(value: float) -> int:
    """Quantize a current amount to the micro grid (ties round half-even)."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidInput(f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise InvalidInput(f"expected a finite number, got {value!r}")
    return round(value * MICRO)


def from_micro(micro: int) -> float:
    """Express a micro amount in current units as a float."""
    return micro / MICRO


def mul_micro(a_micro: int, b_micro: int) -> int:
    """Product of two micro amounts, floored back onto the micro grid."""
    return (a_micro * b_micro) // MICRO


def micro_str(micro: int) -> str:
    """Exact decimal rendering of a micro amount, e.g. 4500000 -> '4.500000'."""
    sign = "-" if micro < 0 else ""
    units, frac = divmod(abs(micro), MICRO)
    return f"{sign}{units}.{frac:06d}"
