"""Environment: schedules, deterministic delta draws, transition folding."""

from __future__ import annotations

import random

import pytest

from fluidity import (
    DeltaDistribution,
    GrowthRule,
    InvalidEpoch,
    InvalidInput,
    InvalidSchedule,
    SequenceError,
    TransitionSchedule,
    apply_transition,
    generate_transitions,
    init_environment,
    observe,
    transitions_for_epoch,
)
from fluidity.environment import StateTransition, generate_epoch_transitions

from conftest import make_schedule


class TestScheduleValidation:
    def test_zero_base_rate_rejected(self):
        with pytest.raises(InvalidSchedule):
            make_schedule(base_rate=0)

    def test_zero_epochs_rejected(self):
        with pytest.raises(InvalidSchedule):
            make_schedule(epochs=0)

    def test_unknown_growth_kind_rejected(self):
        with pytest.raises(InvalidSchedule):
            GrowthRule(kind="cubic")

    def test_negative_linear_increment_rejected(self):
        with pytest.raises(InvalidSchedule):
            GrowthRule(kind="linear", increment=-1)

    def test_shrinking_geometric_factor_rejected(self):
        with pytest.raises(InvalidSchedule):
            GrowthRule(kind="geometric", factor=0.5)

    def test_zero_step_rejected(self):
        with pytest.raises(InvalidSchedule):
            DeltaDistribution(kind="fixed_step", step=0.0)

    def test_empty_uniform_range_rejected(self):
        with pytest.raises(InvalidSchedule):
            DeltaDistribution(kind="uniform", low=2.0, high=2.0)

    def test_zero_only_integer_range_rejected(self):
        with pytest.raises(InvalidSchedule):
            DeltaDistribution(kind="uniform_int", low=0, high=0)


class TestTransitionCounts:
    def test_linear_growth(self):
        schedule = make_schedule(base_rate=2, increment=1, epochs=10)
        assert transitions_for_epoch(schedule, 0) == 2
        assert transitions_for_epoch(schedule, 3) == 5

    def test_geometric_growth(self):
        schedule = TransitionSchedule(
            base_rate=2,
            growth=GrowthRule(kind="geometric", factor=2.0),
            epochs=10,
            delta_distribution=DeltaDistribution(kind="uniform"),
        )
        assert transitions_for_epoch(schedule, 0) == 2
        assert transitions_for_epoch(schedule, 3) == 16

    def test_out_of_range_epoch_rejected(self):
        schedule = make_schedule(epochs=4)
        with pytest.raises(InvalidEpoch):
            transitions_for_epoch(schedule, 4)
        with pytest.raises(InvalidEpoch):
            transitions_for_epoch(schedule, -1)

    def test_counts_never_shrink(self):
        rng = random.Random(99)
        for _ in range(50):
            if rng.random() < 0.5:
                growth = GrowthRule(kind="linear", increment=rng.randint(0, 5))
            else:
                growth = GrowthRule(kind="geometric", factor=1.0 + rng.random() * 2)
            schedule = TransitionSchedule(
                base_rate=rng.randint(1, 10),
                growth=growth,
                epochs=8,
                delta_distribution=DeltaDistribution(kind="uniform"),
            )
            counts = [transitions_for_epoch(schedule, e) for e in range(8)]
            assert all(b >= a for a, b in zip(counts, counts[1:]))
            assert all(c >= 1 for c in counts)


class TestDeterministicGeneration:
    def test_same_seed_same_transitions(self):
        schedule = make_schedule(epochs=6)
        assert generate_transitions(schedule, 42) == generate_transitions(schedule, 42)

    def test_different_seed_different_deltas(self):
        schedule = make_schedule(epochs=6)
        a = generate_transitions(schedule, 42)
        b = generate_transitions(schedule, 43)
        assert [t.delta for t in a] != [t.delta for t in b]

    def test_epochs_regenerate_in_isolation(self):
        schedule = make_schedule(epochs=6)
        full = generate_transitions(schedule, 7)
        for epoch in range(6):
            chunk = generate_epoch_transitions(schedule, 7, epoch)
            assert chunk == [t for t in full if t.epoch == epoch]

    def test_indices_gapless_and_times_stepped(self):
        schedule = make_schedule(epochs=5)
        transitions = generate_transitions(schedule, 11)
        for i, tr in enumerate(transitions):
            assert tr.index == i
            assert tr.time == float(i + 1)
            assert tr.magnitude == abs(tr.delta)

    def test_uniform_deltas_stay_in_range_and_nonzero(self):
        schedule = make_schedule(epochs=6, kind="uniform", low=-5.0, high=5.0)
        for tr in generate_transitions(schedule, 1234):
            assert -5.0 <= tr.delta <= 5.0
            assert tr.delta != 0.0

    def test_integer_deltas_cover_range_and_skip_zero(self):
        schedule = make_schedule(epochs=8, kind="uniform_int", low=-3, high=3)
        seen = set()
        for tr in generate_transitions(schedule, 5):
            assert tr.delta == int(tr.delta)
            assert tr.delta != 0
            assert -3 <= tr.delta <= 3
            seen.add(int(tr.delta))
        assert seen == {-3, -2, -1, 1, 2, 3}

    def test_fixed_step_is_constant(self):
        schedule = make_schedule(epochs=4, kind="fixed_step", step=2.5)
        assert all(tr.delta == 2.5 for tr in generate_transitions(schedule, 0))


class TestFolding:
    def test_initial_state(self):
        schedule = make_schedule(initial_signal=3.5)
        state = init_environment(schedule, 42)
        assert state.signal == 3.5
        assert state.epoch == 0
        assert state.time == 0.0
        assert state.transitions_applied == 0
        assert init_environment(schedule, 42) == state

    def test_fold_accumulates_signal(self):
        schedule = make_schedule(epochs=5)
        state = init_environment(schedule, 8)
        for tr in generate_transitions(schedule, 8):
            before = state.signal
            state = apply_transition(state, tr)
            assert state.signal == before + tr.delta
            assert state.transitions_applied == tr.index + 1
            assert state.time == tr.time

    def test_integer_deltas_sum_exactly(self):
        schedule = make_schedule(
            base_rate=40, increment=0, epochs=5, kind="uniform_int", low=-5, high=5
        )
        state = init_environment(schedule, 21)
        transitions = generate_transitions(schedule, 21)
        for tr in transitions:
            state = apply_transition(state, tr)
        assert state.signal - schedule.initial_signal == sum(tr.delta for tr in transitions)

    def test_zero_magnitude_transition_still_applies(self):
        schedule = make_schedule()
        state = init_environment(schedule, 0)
        tr = StateTransition(index=0, epoch=0, delta=0.0, magnitude=0.0, time=1.0)
        after = apply_transition(state, tr)
        assert after.signal == state.signal
        assert after.transitions_applied == 1

    def test_out_of_order_transition_rejected(self):
        schedule = make_schedule()
        state = init_environment(schedule, 0)
        tr = StateTransition(index=1, epoch=0, delta=1.0, magnitude=1.0, time=1.0)
        with pytest.raises(SequenceError):
            apply_transition(state, tr)

    def test_time_regression_rejected(self):
        schedule = make_schedule()
        state = init_environment(schedule, 0)
        state = apply_transition(
            state, StateTransition(index=0, epoch=0, delta=1.0, magnitude=1.0, time=5.0)
        )
        with pytest.raises(SequenceError):
            apply_transition(
                state, StateTransition(index=1, epoch=0, delta=1.0, magnitude=1.0, time=4.0)
            )

    def test_observation_projects_state(self):
        schedule = make_schedule(initial_signal=2.0)
        state = init_environment(schedule, 0)
        obs = observe(state)
        assert obs.signal == 2.0
        assert obs.epoch == 0
        assert obs.time == 0.0

    def test_magnitude_must_match_delta(self):
        with pytest.raises(InvalidInput):
            StateTransition(index=0, epoch=0, delta=2.0, magnitude=1.0, time=1.0)
