"""Adaptation scoring.

The per-transition score compares how far a prediction moved against how far
the environment moved:

    aa = 1 - |new_prediction - old_prediction| / env_delta

Zero is a precisely proportioned response, one is no response at all, and
negative values flag overcorrection. The fluidity index aggregates these
scores over every counted environment change:

    FI = sum(aa_i) / NC

where NC counts all nonzero changes, whether or not the agent answered them.
Because aa rewards *proportionality* rather than closeness to 1, a companion
responsiveness score ``max(0, 1 - |aa|)`` is reported alongside FI; rankings
use mean responsiveness, FI is preserved as the headline aggregate.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import DegenerateTransition, InvalidInput, NoChangesRecorded


def _require_finite(name: str, value: float) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidInput(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise InvalidInput(f"{name} must be finite, got {value!r}")
    return float(value)


def accuracy_adaptation(old_prediction: float, new_prediction: float, env_delta: float) -> float:
    """Score one prediction update against the magnitude of the change it answers.

    Args:
        old_prediction: prediction in force before the environment changed.
        new_prediction: prediction issued after observing the change.
        env_delta: magnitude of the environment change; strictly positive.

    Returns:
        ``1 - |new - old| / env_delta``. Always <= 1. Zero means the update
        magnitude matched the change exactly; 1 means the prediction did not
        move; negative values mean the update overshot the change.
    """
    old = _require_finite("old_prediction", old_prediction)
    new = _require_finite("new_prediction", new_prediction)
    delta = _require_finite("env_delta", env_delta)
    if delta == 0.0:
        raise DegenerateTransition("env_delta is zero; adaptation is undefined for a non-change")
    if delta < 0.0:
        raise InvalidInput(f"env_delta must be a positive magnitude, got {delta!r}")
    result = 1.0 - abs(new - old) / delta
    if not math.isfinite(result):
        raise InvalidInput("adaptation score overflowed; inputs are out of range")
    return result


def responsiveness_score(aa_value: float) -> float:
    """Fold an adaptation score into [0, 1], where 1 is a perfectly proportioned response.

    Both no-response (aa = 1) and a 2x overcorrection (aa = -1) fold to 0.
    """
    aa = _require_finite("aa_value", aa_value)
    return max(0.0, 1.0 - abs(aa))


@dataclass(frozen=True, slots=True)
class AdaptationSample:
    """One scored prediction update.

    ``aa_value`` must recompute bit-for-bit from the other fields; construction
    enforces that, so a tampered sample cannot exist in memory.
    """

    transition_index: int
    old_prediction: float
    new_prediction: float
    env_delta: float
    aa_value: float

    def __post_init__(self) -> None:
        if not isinstance(self.transition_index, int) or isinstance(self.transition_index, bool):
            raise InvalidInput(f"transition_index must be an int, got {self.transition_index!r}")
        if self.transition_index < 0:
            raise InvalidInput(f"transition_index must be >= 0, got {self.transition_index}")
        expected = accuracy_adaptation(self.old_prediction, self.new_prediction, self.env_delta)
        if not (isinstance(self.aa_value, float) and self.aa_value == expected):
            raise InvalidInput(
                f"aa_value {self.aa_value!r} does not recompute from fields (expected {expected!r})"
            )


def make_sample(
    transition_index: int, old_prediction: float, new_prediction: float, env_delta: float
) -> AdaptationSample:
    """Build a sample, computing its adaptation score from the raw fields."""
    return AdaptationSample(
        transition_index=transition_index,
        old_prediction=float(old_prediction),
        new_prediction=float(new_prediction),
        env_delta=float(env_delta),
        aa_value=accuracy_adaptation(old_prediction, new_prediction, env_delta),
    )


def _aa_values(samples: Iterable[AdaptationSample | float]) -> list[float]:
    values = []
    for item in samples:
        if isinstance(item, AdaptationSample):
            values.append(item.aa_value)
        else:
            values.append(_require_finite("sample", item))
    return values


def fluidity_index(samples: Iterable[AdaptationSample | float], nc: int) -> float:
    """Mean adaptation score over ``nc`` counted environment changes.

    ``samples`` may be AdaptationSample objects or bare scores. ``nc`` is the
    number of nonzero changes in the window and may exceed the sample count
    (changes the agent never answered still dilute the index).
    """
    values = _aa_values(samples)
    if not isinstance(nc, int) or isinstance(nc, bool):
        raise InvalidInput(f"nc must be an int, got {nc!r}")
    if nc < 0:
        raise InvalidInput(f"nc must be >= 0, got {nc}")
    if nc == 0:
        raise NoChangesRecorded("no environment changes counted; the index is undefined")
    if len(values) > nc:
        raise InvalidInput(f"{len(values)} samples exceed nc={nc} counted changes")
    return sum(values) / nc


@dataclass(frozen=True, slots=True)
class FISummary:
    """Aggregate view of one scoring window."""

    fi_value: float
    nc: int
    sample_count: int
    mean_responsiveness: float
    min_aa: float
    max_aa: float

    def __post_init__(self) -> None:
        if self.nc < 1:
            raise InvalidInput(f"nc must be >= 1, got {self.nc}")
        if self.sample_count < 0 or self.sample_count > self.nc:
            raise InvalidInput(
                f"sample_count must lie in [0, nc={self.nc}], got {self.sample_count}"
            )
        _require_finite("fi_value", self.fi_value)
        if not 0.0 <= self.mean_responsiveness <= 1.0:
            raise InvalidInput(
                f"mean_responsiveness must lie in [0, 1], got {self.mean_responsiveness!r}"
            )
        _require_finite("min_aa", self.min_aa)
        _require_finite("max_aa", self.max_aa)
        if self.min_aa > self.max_aa:
            raise InvalidInput(f"min_aa {self.min_aa!r} exceeds max_aa {self.max_aa!r}")


def summarize(samples: Sequence[AdaptationSample | float], nc: int) -> FISummary:
    """Summarize a window: index, responsiveness, extremes, and counts.

    With no samples at all the aggregates are zero while ``nc`` still records
    how many changes went unanswered.
    """
    values = _aa_values(samples)
    fi = fluidity_index(values, nc)
    if values:
        mean_resp = sum(responsiveness_score(v) for v in values) / len(values)
        min_aa = min(values)
        max_aa = max(values)
    else:
        mean_resp = 0.0
        min_aa = 0.0
        max_aa = 0.0
    return FISummary(
        fi_value=fi,
        nc=nc,
        sample_count=len(values),
        mean_responsiveness=mean_resp,
        min_aa=min_aa,
        max_aa=max_aa,
    )
