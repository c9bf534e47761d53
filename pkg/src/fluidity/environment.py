"""Scalar environment with an epoch-scaled transition schedule.

The environment is a single signal that changes by scheduled deltas. The
number of transitions per epoch grows with the epoch index (linearly or
geometrically), so later epochs demand more answers per unit of wall time.
Delta draws are keyed by (seed, epoch, index): any epoch can be regenerated
in isolation and the whole schedule is reproducible bit for bit.

The environment is exogenous: nothing an agent does feeds back into the
signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import rng
from .errors import InvalidEpoch, InvalidInput, InvalidSchedule, SequenceError

_DELTA_STREAM = "env_delta"


@dataclass(frozen=True, slots=True)
class GrowthRule:
    """How the per-epoch transition count grows.

    ``linear`` adds ``increment`` transitions each epoch; ``geometric``
    multiplies the base count by ``factor ** epoch`` and floors. Both are
    monotone by validation.
    """

    kind: str
    increment: int = 0
    factor: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "geometric"):
            raise InvalidSchedule(f"unknown growth kind {self.kind!r}")
        if self.kind == "linear":
            if not isinstance(self.increment, int) or isinstance(self.increment, bool):
                raise InvalidSchedule(f"linear increment must be an int, got {self.increment!r}")
            if self.increment < 0:
                raise InvalidSchedule(f"linear increment must be >= 0, got {self.increment}")
        else:
            if not (isinstance(self.factor, (int, float)) and math.isfinite(self.factor)):
                raise InvalidSchedule(f"geometric factor must be finite, got {self.factor!r}")
            if self.factor < 1.0:
                raise InvalidSchedule(f"geometric factor must be >= 1, got {self.factor!r}")


@dataclass(frozen=True, slots=True)
class DeltaDistribution:
    """Distribution of signal deltas; validated to never emit zero.

    Kinds:
      * ``uniform``: continuous uniform over [low, high], zero resampled away.
      * ``uniform_int``: exact uniform over the integers in [low, high]
        excluding zero.
      * ``fixed_step``: the constant ``step`` every transition.
    """

    kind: str
    low: float = -5.0
    high: float = 5.0
    step: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "uniform":
            for name, v in (("low", self.low), ("high", self.high)):
                if not (isinstance(v, (int, float)) and math.isfinite(v)):
                    raise InvalidSchedule(f"uniform {name} must be finite, got {v!r}")
            if not self.low < self.high:
                raise InvalidSchedule(f"uniform needs low < high, got [{self.low}, {self.high}]")
        elif self.kind == "uniform_int":
            for name, v in (("low", self.low), ("high", self.high)):
                if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
                    raise InvalidSchedule(f"uniform_int {name} must be an integer, got {v!r}")
            if self.low > self.high:
                raise InvalidSchedule(f"uniform_int needs low <= high, got [{self.low}, {self.high}]")
            if int(self.low) == 0 and int(self.high) == 0:
                raise InvalidSchedule("uniform_int over {0} can never produce a change")
        elif self.kind == "fixed_step":
            if not (isinstance(self.step, (int, float)) and math.isfinite(self.step)):
                raise InvalidSchedule(f"fixed_step step must be finite, got {self.step!r}")
            if self.step == 0:
                raise InvalidSchedule("fixed_step step must be nonzero")
        else:
            raise InvalidSchedule(f"unknown delta distribution kind {self.kind!r}")


@dataclass(frozen=True, slots=True)
class TransitionSchedule:
    """Static description of a whole run's transition pattern."""

    base_rate: int
    growth: GrowthRule
    epochs: int
    delta_distribution: DeltaDistribution
    initial_signal: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.base_rate, int) or isinstance(self.base_rate, bool):
            raise InvalidSchedule(f"base_rate must be an int, got {self.base_rate!r}")
        if self.base_rate < 1:
            raise InvalidSchedule(f"base_rate must be >= 1, got {self.base_rate}")
        if not isinstance(self.epochs, int) or isinstance(self.epochs, bool):
            raise InvalidSchedule(f"epochs must be an int, got {self.epochs!r}")
        if self.epochs < 1:
            raise InvalidSchedule(f"epochs must be >= 1, got {self.epochs}")
        if not (
            isinstance(self.initial_signal, (int, float))
            and not isinstance(self.initial_signal, bool)
            and math.isfinite(self.initial_signal)
        ):
            raise InvalidSchedule(f"initial_signal must be finite, got {self.initial_signal!r}")


def default_schedule(*, epochs: int = 10) -> TransitionSchedule:
    """Baseline schedule: 2 transitions in epoch 0, one more each epoch after."""
    return TransitionSchedule(
        base_rate=2,
        growth=GrowthRule(kind="linear", increment=1),
        epochs=epochs,
        delta_distribution=DeltaDistribution(kind="uniform", low=-5.0, high=5.0),
        initial_signal=0.0,
    )


@dataclass(frozen=True, slots=True)
class EnvironmentState:
    """Immutable environment snapshot; transitions produce new states."""

    epoch: int
    time: float
    signal: float
    transitions_applied: int

    def __post_init__(self) -> None:
        if self.epoch < 0:
            raise InvalidInput(f"epoch must be >= 0, got {self.epoch}")
        if self.transitions_applied < 0:
            raise InvalidInput(f"transitions_applied must be >= 0, got {self.transitions_applied}")
        for name, v in (("time", self.time), ("signal", self.signal)):
            if not math.isfinite(v):
                raise InvalidInput(f"{name} must be finite, got {v!r}")
        if self.time < 0:
            raise InvalidInput(f"time must be >= 0, got {self.time}")


@dataclass(frozen=True, slots=True)
class StateTransition:
    """One scheduled signal change."""

    index: int
    epoch: int
    delta: float
    magnitude: float
    time: float

    def __post_init__(self) -> None:
        if self.index < 0:
            raise InvalidInput(f"index must be >= 0, got {self.index}")
        if self.epoch < 0:
            raise InvalidInput(f"epoch must be >= 0, got {self.epoch}")
        for name, v in (("delta", self.delta), ("magnitude", self.magnitude), ("time", self.time)):
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidInput(f"{name} must be finite, got {v!r}")
        if self.magnitude != abs(self.delta):
            raise InvalidInput(
                f"magnitude {self.magnitude!r} does not equal |delta| = {abs(self.delta)!r}"
            )


@dataclass(frozen=True, slots=True)
class Observation:
    """What an agent is shown: the signal and where in the run it sits."""

    signal: float
    epoch: int
    time: float


def init_environment(schedule: TransitionSchedule, seed: int) -> EnvironmentState:
    """Fresh environment at the schedule's initial signal.

    The seed does not shape the initial state; it keys the delta draws made
    when the schedule's transitions are generated.
    """
    if not isinstance(schedule, TransitionSchedule):
        raise InvalidSchedule(f"expected a TransitionSchedule, got {type(schedule).__name__}")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise InvalidInput(f"seed must be an int, got {seed!r}")
    return EnvironmentState(
        epoch=0, time=0.0, signal=float(schedule.initial_signal), transitions_applied=0
    )


def transitions_for_epoch(schedule: TransitionSchedule, epoch: int) -> int:
    """Transition count demanded by ``epoch`` under the schedule's growth rule."""
    if not isinstance(epoch, int) or isinstance(epoch, bool):
        raise InvalidEpoch(f"epoch must be an int, got {epoch!r}")
    if epoch < 0 or epoch >= schedule.epochs:
        raise InvalidEpoch(f"epoch {epoch} outside schedule of {schedule.epochs} epochs")
    growth = schedule.growth
    if growth.kind == "linear":
        return schedule.base_rate + growth.increment * epoch
    return math.floor(schedule.base_rate * growth.factor**epoch)


def draw_delta(distribution: DeltaDistribution, seed: int, epoch: int, index: int) -> float:
    """Deterministic delta for transition ``index`` of ``epoch``."""
    if distribution.kind == "fixed_step":
        return float(distribution.step)
    if distribution.kind == "uniform_int":
        lo, hi = int(distribution.low), int(distribution.high)
        span = hi - lo + 1
        has_zero = lo <= 0 <= hi
        r = rng.draw_u64(seed, _DELTA_STREAM, epoch, index) % (span - (1 if has_zero else 0))
        value = lo + r
        if has_zero and value >= 0:
            value += 1
        return float(value)
    # uniform: resample with a bumped subcounter in the measure-zero case d == 0
    sub = 0
    while True:
        u = rng.unit_open_closed(seed, _DELTA_STREAM, epoch, index, sub)
        d = distribution.low + (distribution.high - distribution.low) * u
        if d != 0.0:
            return d
        sub += 1


def first_index_of_epoch(schedule: TransitionSchedule, epoch: int) -> int:
    """Global index of the first transition in ``epoch``."""
    if not isinstance(epoch, int) or isinstance(epoch, bool):
        raise InvalidEpoch(f"epoch must be an int, got {epoch!r}")
    if epoch < 0 or epoch >= schedule.epochs:
        raise InvalidEpoch(f"epoch {epoch} outside schedule of {schedule.epochs} epochs")
    return sum(transitions_for_epoch(schedule, e) for e in range(epoch))


def generate_epoch_transitions(
    schedule: TransitionSchedule, seed: int, epoch: int
) -> list[StateTransition]:
    """All transitions of one epoch, regenerable without touching other epochs.

    Transition ``i`` (global, zero-based) happens at time ``i + 1``: time
    advances by exactly one unit per transition.
    """
    start = first_index_of_epoch(schedule, epoch)
    out = []
    for j in range(transitions_for_epoch(schedule, epoch)):
        delta = draw_delta(schedule.delta_distribution, seed, epoch, j)
        index = start + j
        out.append(
            StateTransition(
                index=index,
                epoch=epoch,
                delta=delta,
                magnitude=abs(delta),
                time=float(index + 1),
            )
        )
    return out


def generate_transitions(schedule: TransitionSchedule, seed: int) -> list[StateTransition]:
    """The full transition list for a run, in order."""
    out: list[StateTransition] = []
    for epoch in range(schedule.epochs):
        out.extend(generate_epoch_transitions(schedule, seed, epoch))
    return out


def apply_transition(state: EnvironmentState, transition: StateTransition) -> EnvironmentState:
    """Advance the environment by one transition, returning the new state.

    Transitions must arrive in order: the transition's index must equal the
    count already applied, and neither time nor epoch may move backwards. A
    zero-magnitude transition still advances the counters; callers decide
    whether it counts as a change.
    """
    if transition.index != state.transitions_applied:
        raise SequenceError(
            f"transition index {transition.index} does not follow "
            f"{state.transitions_applied} applied transitions"
        )
    if transition.time < state.time:
        raise SequenceError(
            f"transition time {transition.time!r} precedes state time {state.time!r}"
        )
    if transition.epoch < state.epoch:
        raise SequenceError(
            f"transition epoch {transition.epoch} precedes state epoch {state.epoch}"
        )
    return EnvironmentState(
        epoch=transition.epoch,
        time=transition.time,
        signal=state.signal + transition.delta,
        transitions_applied=state.transitions_applied + 1,
    )


def observe(state: EnvironmentState) -> Observation:
    """Project the state onto what agents may see."""
    return Observation(signal=state.signal, epoch=state.epoch, time=state.time)
