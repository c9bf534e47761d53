"""Shared builders for the test suite."""

from __future__ import annotations

import sys
from pathlib import Path

from fluidity import (
    AgentDescriptor,
    DeltaDistribution,
    GrowthRule,
    ScenarioConfig,
    TransitionSchedule,
)

STUB_AGENT = Path(__file__).parent / "stub_agent.py"


def stub_command(mode: str, *args: object) -> list[str]:
    """Command line for the misbehaving external agent stub."""
    return [sys.executable, str(STUB_AGENT), mode, *[str(a) for a in args]]


def echo_command() -> list[str]:
    return [sys.executable, "-m", "fluidity.reference_agent"]


def make_schedule(
    *,
    base_rate: int = 2,
    increment: int = 1,
    epochs: int = 4,
    kind: str = "uniform",
    low: float = -5.0,
    high: float = 5.0,
    step: float = 1.0,
    initial_signal: float = 0.0,
) -> TransitionSchedule:
    if kind == "fixed_step":
        dist = DeltaDistribution(kind="fixed_step", step=step)
    else:
        dist = DeltaDistribution(kind=kind, low=low, high=high)
    return TransitionSchedule(
        base_rate=base_rate,
        growth=GrowthRule(kind="linear", increment=increment),
        epochs=epochs,
        delta_distribution=dist,
        initial_signal=initial_signal,
    )


def make_config(
    *,
    agent_kind: str = "proportional",
    parameters: dict | None = None,
    schedule: TransitionSchedule | None = None,
    seed: int = 42,
    initial_tokens: int = 1000,
    initial_funding: float = 1000.0,
    conversion_rate: float = 1.0,
    inference_cost_rate: float = 0.5,
    payout_scale: float = 1.0,
    auto_repurchase: bool = False,
    epsilon: float = 1e-3,
) -> ScenarioConfig:
    return ScenarioConfig(
        schedule=schedule if schedule is not None else make_schedule(),
        agent=AgentDescriptor(kind=agent_kind, parameters=parameters or {}),
        seed=seed,
        initial_tokens=initial_tokens,
        initial_funding=initial_funding,
        conversion_rate=conversion_rate,
        inference_cost_rate=inference_cost_rate,
        payout_scale=payout_scale,
        auto_repurchase=auto_repurchase,
        epsilon=epsilon,
    )
