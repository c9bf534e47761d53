"""Token and current economy.

Inference spends tokens, tokens consume current, agent work generates current.
All current-denominated quantities live on a fixed-point micro grid (1e-6
current units) so the conservation identity

    reserve == external_funding_total + current_generated_total - current_consumed_total

holds exactly, never approximately. A ledger violating the identity cannot be
constructed at all.

On top of the ledger sit the order accumulators (running sums weighting the
fluidity index by current, token, and time increments between snapshots), the
order classifier (how self-sustaining a run was), and the regime classifier
(how the achieved accumulator compares with throughput).
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import Protocol

from .errors import (
    BudgetExhausted,
    CurrentExhausted,
    InvalidInput,
    InvalidInterval,
    SequenceError,
    ZeroInterval,
)
from .fixedpoint import MICRO, from_micro, mul_micro, to_micro


@dataclass(frozen=True, slots=True)
class ResourceLedger:
    """Balances and lifetime totals, in tokens and micro-current.

    All ``*_total`` fields are non-decreasing over a run. The rates are
    quantized once at construction: ``conversion_rate`` is micro-current
    generated per unit of work value, ``inference_cost_rate`` micro-current
    consumed per token spent.
    """

    tokens_available: int
    tokens_spent_total: int
    current_generated_total: int
    current_consumed_total: int
    reserve: int
    external_funding_total: int
    conversion_rate: int
    inference_cost_rate: int

    def __post_init__(self) -> None:
        for name in (
            "tokens_available",
            "tokens_spent_total",
            "current_generated_total",
            "current_consumed_total",
            "reserve",
            "external_funding_total",
            "conversion_rate",
            "inference_cost_rate",
        ):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise InvalidInput(f"{name} must be an int, got {v!r}")
            if v < 0:
                raise InvalidInput(f"{name} must be >= 0, got {v}")
        if self.conversion_rate == 0 or self.inference_cost_rate == 0:
            raise InvalidInput("rates must be positive")
        expected = (
            self.external_funding_total
            + self.current_generated_total
            - self.current_consumed_total
        )
        if self.reserve != expected:
            raise InvalidInput(
                f"reserve {self.reserve} breaks conservation; "
                f"funding + generated - consumed = {expected}"
            )


def new_ledger(
    *,
    tokens: int,
    funding: float,
    conversion_rate: float,
    inference_cost_rate: float,
) -> ResourceLedger:
    """Open a ledger with seed tokens and external current funding."""
    if not isinstance(tokens, int) or isinstance(tokens, bool) or tokens < 0:
        raise InvalidInput(f"tokens must be an int >= 0, got {tokens!r}")
    funding_micro = to_micro(funding)
    if funding_micro < 0:
        raise InvalidInput(f"funding must be >= 0, got {funding!r}")
    conv_micro = to_micro(conversion_rate)
    cost_micro = to_micro(inference_cost_rate)
    if conv_micro <= 0:
        raise InvalidInput(f"conversion_rate must be > 0, got {conversion_rate!r}")
    if cost_micro <= 0:
        raise InvalidInput(f"inference_cost_rate must be > 0, got {inference_cost_rate!r}")
    return ResourceLedger(
        tokens_available=tokens,
        tokens_spent_total=0,
        current_generated_total=0,
        current_consumed_total=0,
        reserve=funding_micro,
        external_funding_total=funding_micro,
        conversion_rate=conv_micro,
        inference_cost_rate=cost_micro,
    )


def charge_inference(ledger: ResourceLedger, tokens: int) -> ResourceLedger:
    """Spend ``tokens`` on inference, consuming current at the cost rate.

    Charging zero tokens is the identity. Raises BudgetExhausted when the
    token balance cannot cover the spend and CurrentExhausted when the implied
    consumption would drive the reserve negative.
    """
    if not isinstance(tokens, int) or isinstance(tokens, bool) or tokens < 0:
        raise InvalidInput(f"tokens must be an int >= 0, got {tokens!r}")
    if tokens == 0:
        return ledger
    if tokens > ledger.tokens_available:
        raise BudgetExhausted(
            f"cannot spend {tokens} tokens with {ledger.tokens_available} available"
        )
    cost = tokens * ledger.inference_cost_rate
    if cost > ledger.reserve:
        raise CurrentExhausted(
            f"consuming {cost} micro-current would overdraw reserve {ledger.reserve}"
        )
    return replace(
        ledger,
        tokens_available=ledger.tokens_available - tokens,
        tokens_spent_total=ledger.tokens_spent_total + tokens,
        current_consumed_total=ledger.current_consumed_total + cost,
        reserve=ledger.reserve - cost,
    )


def settle_replenishment(
    ledger: ResourceLedger, work_value: float, *, auto_repurchase: bool = False
) -> ResourceLedger:
    """Credit the current generated by ``work_value`` units of agent work.

    The credit is ``work_value * conversion_rate``, floored onto the micro
    grid. With ``auto_repurchase`` the replenished current also buys back as
    many whole tokens as it covers at the inference cost rate; the remainder
    is left in the reserve and the purchase itself consumes nothing (current
    is only consumed when inference is charged).
    """
    if isinstance(work_value, bool) or not isinstance(work_value, (int, float)):
        raise InvalidInput(f"work_value must be a number, got {work_value!r}")
    if not math.isfinite(work_value) or work_value < 0:
        raise InvalidInput(f"work_value must be finite and >= 0, got {work_value!r}")
    generated = mul_micro(to_micro(work_value), ledger.conversion_rate)
    tokens_bought = generated // ledger.inference_cost_rate if auto_repurchase else 0
    return replace(
        ledger,
        tokens_available=ledger.tokens_available + tokens_bought,
        current_generated_total=ledger.current_generated_total + generated,
        reserve=ledger.reserve + generated,
    )


def throughput(delta_current: float, delta_time: float) -> float:
    """Current per unit time over an interval: ``delta_current / delta_time``."""
    for name, v in (("delta_current", delta_current), ("delta_time", delta_time)):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise InvalidInput(f"{name} must be a finite number, got {v!r}")
    if delta_time == 0:
        raise ZeroInterval("throughput over a zero-length interval is undefined")
    if delta_time < 0:
        raise InvalidInterval(f"delta_time must be positive, got {delta_time!r}")
    return delta_current / delta_time


class SnapshotLike(Protocol):
    """What the accumulators need from a snapshot."""

    time: float
    prefix_fi: float
    ledger: ResourceLedger


@dataclass(frozen=True, slots=True)
class OrderIntegrals:
    """Running order accumulators.

    ``i1`` weights the prefix index by generated current (current units),
    ``i2`` additionally by tokens spent (token*current), ``i3`` additionally
    by elapsed time (token*current*time). Each term covers the gap between
    two consecutive snapshots and uses the prefix index at the later one.
    """

    i1: float
    i2: float
    i3: float

    def __post_init__(self) -> None:
        for name in ("i1", "i2", "i3"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidInput(f"{name} must be finite, got {v!r}")


def accumulate_orders(snapshots: Sequence[SnapshotLike]) -> OrderIntegrals:
    """Evaluate the three accumulators over a time-ordered snapshot list.

    Fewer than two snapshots leave nothing to accumulate: all three sums are
    zero. Out-of-order snapshots raise SequenceError.
    """
    i1 = 0.0
    i2 = 0.0
    i3 = 0.0
    prev = None
    for k, snap in enumerate(snapshots):
        if prev is not None:
            if snap.time < prev.time:
                raise SequenceError(
                    f"snapshot {k} at time {snap.time!r} precedes its predecessor at {prev.time!r}"
                )
            fi = snap.prefix_fi
            dcur = from_micro(
                snap.ledger.current_generated_total - prev.ledger.current_generated_total
            )
            dtok = snap.ledger.tokens_spent_total - prev.ledger.tokens_spent_total
            dt = snap.time - prev.time
            i1 += fi * dcur
            i2 += fi * dtok * dcur
            i3 += fi * dtok * dcur * dt
        prev = snap
    return OrderIntegrals(i1=i1, i2=i2, i3=i3)


class FluidityOrder(enum.Enum):
    """How self-sustaining a run's economy was."""

    FIRST = "first"
    SECOND = "second"
    THIRD = "third"


class RegimeKind(enum.Enum):
    """Throughput regime labels."""

    SUB_OPTIMAL = "sub_optimal"
    OPTIMAL = "optimal"
    BEYOND_OPTIMAL = "beyond_optimal"


@dataclass(frozen=True, slots=True)
class FluidityRegime:
    """A regime verdict together with the tolerance it was judged at."""

    kind: RegimeKind
    epsilon: float

    def __post_init__(self) -> None:
        if not isinstance(self.kind, RegimeKind):
            raise InvalidInput(f"kind must be a RegimeKind, got {self.kind!r}")
        if not (isinstance(self.epsilon, (int, float)) and math.isfinite(self.epsilon)):
            raise InvalidInput(f"epsilon must be finite, got {self.epsilon!r}")
        if self.epsilon <= 0:
            raise InvalidInput(f"epsilon must be > 0, got {self.epsilon!r}")


def _final(history: Sequence[ResourceLedger]) -> ResourceLedger:
    if not history:
        raise InvalidInput("ledger history must contain at least one snapshot")
    return history[-1]


def second_order_satisfied(
    history: Sequence[ResourceLedger], *, seed_allowance: float | None = None
) -> bool:
    """Did the run generate enough current to cover consumption beyond its seed?

    The allowance forgives consumption up to the configured initial funding;
    it defaults to the final snapshot's external funding total. A run that
    generated nothing at all is never self-replenishing, however small its
    consumption.
    """
    final = _final(history)
    allowance = (
        final.external_funding_total if seed_allowance is None else to_micro(seed_allowance)
    )
    if allowance < 0:
        raise InvalidInput(f"seed_allowance must be >= 0, got {seed_allowance!r}")
    if final.current_generated_total == 0:
        return False
    return final.current_generated_total + allowance >= final.current_consumed_total


def reserve_growth_satisfied(history: Sequence[ResourceLedger]) -> bool:
    """Did the reserve strictly increase across two consecutive epoch boundaries?

    ``history`` holds one ledger per epoch boundary; the test is whether some
    window of three consecutive snapshots is strictly increasing in reserve.
    """
    _final(history)
    reserves = [ledger.reserve for ledger in history]
    return any(
        reserves[k] < reserves[k + 1] < reserves[k + 2] for k in range(len(reserves) - 2)
    )


def classify_order(
    history: Sequence[ResourceLedger], *, seed_allowance: float | None = None
) -> FluidityOrder:
    """Classify a run from its per-epoch ledger history.

    First: ran on external funding. Second: covered its own consumption
    (beyond the seed allowance) with generated current. Third: additionally
    grew its reserve across at least two consecutive epoch boundaries. Third
    is a strict subset of Second by construction.
    """
    if not second_order_satisfied(history, seed_allowance=seed_allowance):
        return FluidityOrder.FIRST
    if reserve_growth_satisfied(history):
        return FluidityOrder.THIRD
    return FluidityOrder.SECOND


def classify_regime(
    integrals: OrderIntegrals, t: float, order: FluidityOrder, epsilon: float
) -> FluidityRegime:
    """Compare the accumulator selected by ``order`` against throughput ``t``.

    Within ``epsilon * max(|t|, 1)`` of ``t`` is Optimal; above the band is
    BeyondOptimal; below is SubOptimal. Exactly one regime holds for any
    input, and the verdict is monotone in the accumulator value.
    """
    if isinstance(t, bool) or not isinstance(t, (int, float)) or not math.isfinite(t):
        raise InvalidInput(f"throughput must be a finite number, got {t!r}")
    if not isinstance(order, FluidityOrder):
        raise InvalidInput(f"order must be a FluidityOrder, got {order!r}")
    if (
        isinstance(epsilon, bool)
        or not isinstance(epsilon, (int, float))
        or not math.isfinite(epsilon)
        or epsilon <= 0
    ):
        raise InvalidInput(f"epsilon must be a finite number > 0, got {epsilon!r}")
    if order is FluidityOrder.FIRST:
        v = integrals.i1
    elif order is FluidityOrder.SECOND:
        v = integrals.i2
    else:
        v = integrals.i3
    band = epsilon * max(abs(t), 1.0)
    if abs(v - t) <= band:
        kind = RegimeKind.OPTIMAL
    elif v > t + band:
        kind = RegimeKind.BEYOND_OPTIMAL
    else:
        kind = RegimeKind.SUB_OPTIMAL
    return FluidityRegime(kind=kind, epsilon=float(epsilon))


def ledger_conserved(ledger: ResourceLedger) -> bool:
    """The conservation identity, as a predicate (always true for constructed ledgers)."""
    return (
        ledger.reserve
        == ledger.external_funding_total
        + ledger.current_generated_total
        - ledger.current_consumed_total
    )


__all__ = [
    "MICRO",
    "FluidityOrder",
    "FluidityRegime",
    "OrderIntegrals",
    "RegimeKind",
    "ResourceLedger",
    "SnapshotLike",
    "accumulate_orders",
    "charge_inference",
    "classify_order",
    "classify_regime",
    "ledger_conserved",
    "new_ledger",
    "reserve_growth_satisfied",
    "second_order_satisfied",
    "settle_replenishment",
    "throughput",
]
