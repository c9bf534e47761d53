"""Built-in agent behavior: descriptors, closed forms, noise, budget limits."""

from __future__ import annotations

import random

import pytest

from fluidity import (
    AgentDescriptor,
    BudgetExhausted,
    InvalidInput,
    Observation,
    PredictionRequest,
    PredictionResponse,
    make_agent,
)
from fluidity.agents import initial_prediction_for


def ask(agent, signal, *, epoch=0, time=1.0, budget=100):
    request = PredictionRequest(
        observation=Observation(signal=signal, epoch=epoch, time=time),
        token_budget=budget,
    )
    return agent.predict(request)


class TestDescriptor:
    def test_unknown_kind_rejected(self):
        with pytest.raises(InvalidInput):
            AgentDescriptor(kind="psychic")

    def test_external_requires_a_command(self):
        with pytest.raises(InvalidInput):
            AgentDescriptor(kind="external")

    def test_parameters_must_be_a_mapping(self):
        with pytest.raises(InvalidInput):
            AgentDescriptor(kind="static", parameters=[("initial", 1.0)])

    def test_boolean_gain_rejected(self):
        descriptor = AgentDescriptor(kind="proportional", parameters={"gain": True})
        with pytest.raises(InvalidInput):
            make_agent(descriptor, initial_signal=0.0, seed=1)

    def test_initial_defaults_to_the_signal(self):
        descriptor = AgentDescriptor(kind="static")
        assert initial_prediction_for(descriptor, 7.5) == 7.5
        pinned = AgentDescriptor(kind="static", parameters={"initial": 2.0})
        assert initial_prediction_for(pinned, 7.5) == 2.0


class TestRequestResponse:
    def test_negative_budget_rejected(self):
        obs = Observation(signal=0.0, epoch=0, time=1.0)
        with pytest.raises(InvalidInput):
            PredictionRequest(observation=obs, token_budget=-1)

    def test_non_finite_prediction_rejected(self):
        with pytest.raises(InvalidInput):
            PredictionResponse(prediction=float("nan"), tokens_used=1)

    def test_zero_spend_rejected(self):
        with pytest.raises(InvalidInput):
            PredictionResponse(prediction=0.0, tokens_used=0)


class TestStatic:
    def test_never_moves(self):
        agent = make_agent(
            AgentDescriptor(kind="static", parameters={"initial": 3.0}),
            initial_signal=3.0,
            seed=1,
        )
        for signal in (4.0, -10.0, 3.0, 99.5):
            assert ask(agent, signal).prediction == 3.0


class TestProportional:
    def test_unit_gain_tracks_exactly(self):
        agent = make_agent(
            AgentDescriptor(kind="proportional"), initial_signal=5.0, seed=1
        )
        rng = random.Random(7)
        signal = 5.0
        for _ in range(50):
            signal += rng.uniform(-3, 3)
            assert ask(agent, signal).prediction == pytest.approx(signal, abs=1e-9)

    def test_closed_form_for_any_gain(self):
        # steps telescope: prediction = initial + gain * (signal - initial signal)
        rng = random.Random(9)
        for _ in range(20):
            gain = rng.uniform(-2, 2)
            agent = make_agent(
                AgentDescriptor(kind="proportional", parameters={"gain": gain, "initial": 1.0}),
                initial_signal=0.0,
                seed=1,
            )
            signal = 0.0
            for _ in range(10):
                signal += rng.uniform(-5, 5)
                got = ask(agent, signal).prediction
            assert got == pytest.approx(1.0 + gain * signal, rel=1e-9, abs=1e-9)


class TestOvercorrector:
    def test_default_gain_overshoots_by_half(self):
        agent = make_agent(
            AgentDescriptor(kind="overcorrector"), initial_signal=0.0, seed=1
        )
        assert agent.name == "overcorrector"
        response = ask(agent, 2.0)
        # moved 3.0 against a change of 2.0
        assert response.prediction == pytest.approx(3.0)


class TestLagged:
    def test_first_lag_queries_stand_still(self):
        agent = make_agent(
            AgentDescriptor(kind="lagged", parameters={"lag": 3, "initial": 0.0}),
            initial_signal=0.0,
            seed=1,
        )
        assert ask(agent, 1.0).prediction == 0.0
        assert ask(agent, 2.0).prediction == 0.0
        assert ask(agent, 3.0).prediction == 0.0

    def test_replays_the_signal_lag_queries_late(self):
        lag = 2
        agent = make_agent(
            AgentDescriptor(kind="lagged", parameters={"lag": lag, "initial": 0.0}),
            initial_signal=0.0,
            seed=1,
        )
        rng = random.Random(13)
        signals = []
        value = 0.0
        for _ in range(20):
            value += rng.uniform(-4, 4)
            signals.append(value)
        predictions = [ask(agent, s).prediction for s in signals]
        for i, got in enumerate(predictions):
            expected = signals[i - lag] if i >= lag else 0.0
            assert got == pytest.approx(expected, abs=1e-9)


class TestNoisy:
    def test_same_seed_same_answers(self):
        first = make_agent(AgentDescriptor(kind="noisy"), initial_signal=0.0, seed=77)
        second = make_agent(AgentDescriptor(kind="noisy"), initial_signal=0.0, seed=77)
        for signal in (1.0, -2.0, 0.5):
            assert ask(first, signal).prediction == ask(second, signal).prediction

    def test_different_seeds_differ(self):
        first = make_agent(AgentDescriptor(kind="noisy"), initial_signal=0.0, seed=1)
        second = make_agent(AgentDescriptor(kind="noisy"), initial_signal=0.0, seed=2)
        answers_first = [ask(first, float(s)).prediction for s in range(5)]
        answers_second = [ask(second, float(s)).prediction for s in range(5)]
        assert answers_first != answers_second

    def test_noise_stays_within_scale(self):
        scale = 0.25
        agent = make_agent(
            AgentDescriptor(kind="noisy", parameters={"noise_scale": scale}),
            initial_signal=0.0,
            seed=5,
        )
        for signal in range(200):
            got = ask(agent, float(signal)).prediction
            assert abs(got - signal) <= scale

    def test_zero_scale_tracks_exactly(self):
        agent = make_agent(
            AgentDescriptor(kind="noisy", parameters={"noise_scale": 0.0}),
            initial_signal=0.0,
            seed=5,
        )
        assert ask(agent, 4.25).prediction == 4.25


class TestBudget:
    def test_call_cost_is_charged(self):
        agent = make_agent(
            AgentDescriptor(kind="static", parameters={"cost": 3}),
            initial_signal=0.0,
            seed=1,
        )
        assert ask(agent, 1.0).tokens_used == 3

    def test_budget_below_cost_raises(self):
        agent = make_agent(
            AgentDescriptor(kind="static", parameters={"cost": 3}),
            initial_signal=0.0,
            seed=1,
        )
        with pytest.raises(BudgetExhausted):
            ask(agent, 1.0, budget=2)

    def test_zero_cost_rejected(self):
        descriptor = AgentDescriptor(kind="static", parameters={"cost": 0})
        with pytest.raises(InvalidInput):
            make_agent(descriptor, initial_signal=0.0, seed=1)
