"""Closed-loop episode runner, replay verifier, and batch executor.

One episode walks a schedule transition by transition: apply the change,
query the agent (if it can still pay), charge the inference, score the
prediction update, settle the work payout, and snapshot the world. Snapshots
exist only for token-consuming actions. When tokens or current run out the
environment keeps moving and every unanswered change scores as a non-response
(aa = 1); when an agent faults the episode stops where it stands, leaving a
verifiable prefix.

Identical configs produce byte-identical serialized run logs, sequentially or
in a batch at any parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .agents import (
    AgentDescriptor,
    PredictionRequest,
    initial_prediction_for,
    make_agent,
)
from .economy import (
    FluidityOrder,
    FluidityRegime,
    OrderIntegrals,
    ResourceLedger,
    accumulate_orders,
    charge_inference,
    classify_order,
    classify_regime,
    new_ledger,
    settle_replenishment,
)
from .environment import (
    EnvironmentState,
    StateTransition,
    TransitionSchedule,
    apply_transition,
    generate_epoch_transitions,
    init_environment,
    observe,
    transitions_for_epoch,
)
from .errors import (
    AgentFault,
    BudgetExhausted,
    CurrentExhausted,
    FluidityError,
    IntegrityError,
    InvalidInput,
)
from .fixedpoint import from_micro
from .metrics import AdaptationSample, FISummary, fluidity_index, make_sample, responsiveness_score, summarize

REASON_BUDGET = "budget_exhausted"
REASON_CURRENT = "current_exhausted"
REASON_FAULT = "agent_fault"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one episode depends on."""

    schedule: TransitionSchedule
    agent: AgentDescriptor
    seed: int
    initial_tokens: int
    initial_funding: float
    conversion_rate: float = 1.0
    inference_cost_rate: float = 1.0
    payout_scale: float = 1.0
    auto_repurchase: bool = False
    epsilon: float = 1e-3

    def __post_init__(self) -> None:
        if not isinstance(self.schedule, TransitionSchedule):
            raise InvalidInput(f"schedule must be a TransitionSchedule, got {self.schedule!r}")
        if not isinstance(self.agent, AgentDescriptor):
            raise InvalidInput(f"agent must be an AgentDescriptor, got {self.agent!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InvalidInput(f"seed must be an int, got {self.seed!r}")
        if not isinstance(self.initial_tokens, int) or isinstance(self.initial_tokens, bool):
            raise InvalidInput(f"initial_tokens must be an int, got {self.initial_tokens!r}")
        if self.initial_tokens < 0:
            raise InvalidInput(f"initial_tokens must be >= 0, got {self.initial_tokens}")
        for name, minimum in (
            ("initial_funding", 0.0),
            ("payout_scale", 0.0),
        ):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidInput(f"{name} must be a finite number, got {v!r}")
            if v < minimum:
                raise InvalidInput(f"{name} must be >= {minimum}, got {v!r}")
        for name in ("conversion_rate", "inference_cost_rate", "epsilon"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidInput(f"{name} must be a finite number, got {v!r}")
            if v <= 0:
                raise InvalidInput(f"{name} must be > 0, got {v!r}")
        if not isinstance(self.auto_repurchase, bool):
            raise InvalidInput(f"auto_repurchase must be a bool, got {self.auto_repurchase!r}")


@dataclass(frozen=True, slots=True)
class Snapshot:
    """World state bound to one token-consuming model action."""

    index: int
    time: float
    environment: EnvironmentState
    prediction_old: float
    prediction_new: float
    tokens_used: int
    ledger: ResourceLedger
    prefix_fi: float

    def __post_init__(self) -> None:
        if self.index < 0:
            raise InvalidInput(f"index must be >= 0, got {self.index}")
        if not isinstance(self.tokens_used, int) or isinstance(self.tokens_used, bool):
            raise InvalidInput(f"tokens_used must be an int, got {self.tokens_used!r}")
        if self.tokens_used < 1:
            raise InvalidInput(f"tokens_used must be >= 1, got {self.tokens_used}")
        for name in ("time", "prediction_old", "prediction_new", "prefix_fi"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidInput(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class RunLog:
    """Complete, self-verifying record of one episode."""

    config: ScenarioConfig
    transitions: tuple[StateTransition, ...]
    snapshots: tuple[Snapshot, ...]
    samples: tuple[AdaptationSample, ...]
    summary: FISummary
    integrals: OrderIntegrals
    order: FluidityOrder
    regime: FluidityRegime
    truncated: bool
    truncated_reason: str | None
    skipped_transitions: int


@dataclass(frozen=True)
class EpisodeFailure:
    """Batch slot for an episode that raised instead of finishing."""

    index: int
    error: str
    message: str


def _non_response(transition: StateTransition, prediction: float) -> AdaptationSample:
    # an unanswered change: the prediction stays put, scoring aa = 1 exactly
    return make_sample(transition.index, prediction, prediction, transition.magnitude)


def run_episode(config: ScenarioConfig) -> RunLog:
    """Run one closed-loop episode to the end of its schedule (or its fault).

    Bookkeeping guarantees, for every produced log:
      * one snapshot per token-consuming prediction, none otherwise;
      * len(samples) + skipped_transitions + unscored tail == len(transitions);
      * the ledger conservation identity holds at every snapshot;
      * identical configs give identical logs, bit for bit.
    """
    schedule = config.schedule
    env = init_environment(schedule, config.seed)
    ledger = new_ledger(
        tokens=config.initial_tokens,
        funding=config.initial_funding,
        conversion_rate=config.conversion_rate,
        inference_cost_rate=config.inference_cost_rate,
    )
    agent = make_agent(config.agent, initial_signal=schedule.initial_signal, seed=config.seed)
    prediction = initial_prediction_for(config.agent, schedule.initial_signal)

    transitions: list[StateTransition] = []
    samples: list[AdaptationSample] = []
    snapshots: list[Snapshot] = []
    epoch_ledgers: list[ResourceLedger] = [ledger]
    skipped = 0
    nc = 0
    truncated = False
    reason: str | None = None
    exhausted = False
    faulted = False

    try:
        for epoch in range(schedule.epochs):
            for transition in generate_epoch_transitions(schedule, config.seed, epoch):
                env = apply_transition(env, transition)
                transitions.append(transition)
                if transition.magnitude == 0.0:
                    skipped += 1
                    continue
                nc += 1
                if exhausted:
                    samples.append(_non_response(transition, prediction))
                    continue
                if ledger.tokens_available < agent.call_cost:
                    exhausted, truncated, reason = True, True, REASON_BUDGET
                    samples.append(_non_response(transition, prediction))
                    continue
                if agent.call_cost * ledger.inference_cost_rate > ledger.reserve:
                    exhausted, truncated, reason = True, True, REASON_CURRENT
                    samples.append(_non_response(transition, prediction))
                    continue
                request = PredictionRequest(
                    observation=observe(env), token_budget=ledger.tokens_available
                )
                try:
                    response = agent.predict(request)
                except BudgetExhausted:
                    exhausted, truncated, reason = True, True, REASON_BUDGET
                    samples.append(_non_response(transition, prediction))
                    continue
                except AgentFault as exc:
                    truncated, faulted = True, True
                    reason = f"{REASON_FAULT}: {exc}"
                    break
                try:
                    ledger = charge_inference(ledger, response.tokens_used)
                except CurrentExhausted:
                    exhausted, truncated, reason = True, True, REASON_CURRENT
                    samples.append(_non_response(transition, prediction))
                    continue
                sample = make_sample(
                    transition.index, prediction, response.prediction, transition.magnitude
                )
                samples.append(sample)
                work_value = responsiveness_score(sample.aa_value) * config.payout_scale
                ledger = settle_replenishment(
                    ledger, work_value, auto_repurchase=config.auto_repurchase
                )
                prediction = response.prediction
                snapshots.append(
                    Snapshot(
                        index=len(snapshots),
                        time=transition.time,
                        environment=env,
                        prediction_old=sample.old_prediction,
                        prediction_new=sample.new_prediction,
                        tokens_used=response.tokens_used,
                        ledger=ledger,
                        prefix_fi=fluidity_index(samples, nc),
                    )
                )
            if faulted:
                break
            epoch_ledgers.append(ledger)
    finally:
        agent.close()

    summary = summarize(samples, nc)
    integrals = accumulate_orders(snapshots)
    order = classify_order(epoch_ledgers)
    t = from_micro(ledger.current_generated_total) / env.time
    regime = classify_regime(integrals, t, order, config.epsilon)
    return RunLog(
        config=config,
        transitions=tuple(transitions),
        snapshots=tuple(snapshots),
        samples=tuple(samples),
        summary=summary,
        integrals=integrals,
        order=order,
        regime=regime,
        truncated=truncated,
        truncated_reason=reason,
        skipped_transitions=skipped,
    )


def _compare_sequences(name: str, recorded: tuple, recomputed: tuple) -> None:
    for i, (a, b) in enumerate(zip(recorded, recomputed)):
        if a != b:
            raise IntegrityError(f"{name}[{i}]", f"recorded {a!r} but recomputed {b!r}")
    if len(recorded) != len(recomputed):
        raise IntegrityError(
            f"{name}[{min(len(recorded), len(recomputed))}]",
            f"recorded {len(recorded)} entries but recomputed {len(recomputed)}",
        )


def _compare_logs(recorded: RunLog, recomputed: RunLog) -> None:
    _compare_sequences("transitions", recorded.transitions, recomputed.transitions)
    _compare_sequences("samples", recorded.samples, recomputed.samples)
    _compare_sequences("snapshots", recorded.snapshots, recomputed.snapshots)
    for name in ("summary", "integrals", "order", "regime", "truncated", "truncated_reason",
                 "skipped_transitions"):
        a, b = getattr(recorded, name), getattr(recomputed, name)
        if a != b:
            raise IntegrityError(name, f"recorded {a!r} but recomputed {b!r}")


def _epoch_ledger_history(log: RunLog) -> list[ResourceLedger]:
    """Rebuild the per-epoch-boundary ledger history a log implies."""
    initial = new_ledger(
        tokens=log.config.initial_tokens,
        funding=log.config.initial_funding,
        conversion_rate=log.config.conversion_rate,
        inference_cost_rate=log.config.inference_cost_rate,
    )
    # ledger after the last snapshot at or before the end of each completed epoch
    completed: list[int] = []
    per_epoch_recorded: dict[int, int] = {}
    for tr in log.transitions:
        per_epoch_recorded[tr.epoch] = per_epoch_recorded.get(tr.epoch, 0) + 1
    for epoch in range(log.config.schedule.epochs):
        expected = transitions_for_epoch(log.config.schedule, epoch)
        if per_epoch_recorded.get(epoch, 0) == expected:
            completed.append(epoch)
        else:
            break
    history = [initial]
    ledger = initial
    snapshots = iter(log.snapshots)
    pending = next(snapshots, None)
    for epoch in completed:
        while pending is not None and pending.environment.epoch <= epoch:
            ledger = pending.ledger
            pending = next(snapshots, None)
        history.append(ledger)
    return history


def _verify_external(log: RunLog) -> None:
    """Metric-only verification: the log must be self-consistent.

    Predictions from an external process cannot be regenerated, so the checks
    recompute everything derivable: the transition stream from the seed, each
    sample's score from its fields, the prefix index chain, the summary, the
    accumulators, and both classifications.
    """
    schedule = log.config.schedule
    expected_transitions: list[StateTransition] = []
    for epoch in range(schedule.epochs):
        if len(expected_transitions) >= len(log.transitions):
            break
        expected_transitions.extend(
            generate_epoch_transitions(schedule, log.config.seed, epoch)
        )
    _compare_sequences(
        "transitions", log.transitions, tuple(expected_transitions[: len(log.transitions)])
    )
    by_index = {tr.index: tr for tr in log.transitions}
    nonzero = sum(1 for tr in log.transitions if tr.magnitude != 0.0)
    skipped = sum(1 for tr in log.transitions if tr.magnitude == 0.0)
    if skipped != log.skipped_transitions:
        raise IntegrityError(
            "skipped_transitions", f"recorded {log.skipped_transitions} but recomputed {skipped}"
        )
    for i, sample in enumerate(log.samples):
        tr = by_index.get(sample.transition_index)
        if tr is None:
            raise IntegrityError(f"samples[{i}]", f"no transition {sample.transition_index}")
        if sample.env_delta != tr.magnitude:
            raise IntegrityError(
                f"samples[{i}]",
                f"env_delta {sample.env_delta!r} does not match transition magnitude "
                f"{tr.magnitude!r}",
            )
        # aa_value recomputation is enforced by AdaptationSample itself
    if nonzero == 0:
        raise IntegrityError("summary", "log records no nonzero transitions")
    recomputed_summary = summarize(list(log.samples), nonzero)
    if recomputed_summary != log.summary:
        raise IntegrityError(
            "summary", f"recorded {log.summary!r} but recomputed {recomputed_summary!r}"
        )
    # prefix chain: samples are ordered by transition, snapshots by action
    prefix: list[AdaptationSample] = []
    sample_by_index = {s.transition_index: s for s in log.samples}
    ordered = sorted(sample_by_index)
    for k, snap in enumerate(log.snapshots):
        applied = snap.environment.transitions_applied
        while len(prefix) < len(ordered) and ordered[len(prefix)] < applied:
            prefix.append(sample_by_index[ordered[len(prefix)]])
        counted = sum(
            1
            for tr in log.transitions
            if tr.index < snap.environment.transitions_applied and tr.magnitude != 0.0
        )
        expected_fi = fluidity_index(prefix, counted) if counted else 0.0
        if snap.prefix_fi != expected_fi:
            raise IntegrityError(
                f"snapshots[{k}].prefix_fi",
                f"recorded {snap.prefix_fi!r} but recomputed {expected_fi!r}",
            )
    recomputed_integrals = accumulate_orders(log.snapshots)
    if recomputed_integrals != log.integrals:
        raise IntegrityError(
            "integrals", f"recorded {log.integrals!r} but recomputed {recomputed_integrals!r}"
        )
    history = _epoch_ledger_history(log)
    order = classify_order(history)
    if order != log.order:
        raise IntegrityError("order", f"recorded {log.order!r} but recomputed {order!r}")
    final_ledger = log.snapshots[-1].ledger if log.snapshots else history[0]
    final_time = log.transitions[-1].time if log.transitions else 0.0
    if final_time > 0:
        t = from_micro(final_ledger.current_generated_total) / final_time
        regime = classify_regime(log.integrals, t, order, log.config.epsilon)
        if regime != log.regime:
            raise IntegrityError("regime", f"recorded {log.regime!r} but recomputed {regime!r}")


def replay(log: RunLog) -> RunLog:
    """Verify a log by recomputation; return the recomputed log.

    Built-in agents are re-run from the config and compared field for field.
    External agents cannot be re-run, so their logs get metric-only
    verification. The first divergence raises IntegrityError naming its
    location.
    """
    if log.config.agent.kind == "external":
        _verify_external(log)
        return log
    recomputed = run_episode(log.config)
    _compare_logs(log, recomputed)
    return recomputed


def batch(configs: list[ScenarioConfig], parallelism: int) -> list[RunLog | EpisodeFailure]:
    """Run many episodes; results line up with ``configs`` in order.

    Episodes are independent, so any parallelism yields results identical to
    a sequential run. A failing episode becomes an EpisodeFailure entry; its
    siblings are unaffected.
    """
    if not isinstance(parallelism, int) or isinstance(parallelism, bool) or parallelism < 1:
        raise InvalidInput(f"parallelism must be an int >= 1, got {parallelism!r}")
    results: list[RunLog | EpisodeFailure] = []
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(run_episode, config) for config in configs]
        for index, future in enumerate(futures):
            try:
                results.append(future.result())
            except FluidityError as exc:
                results.append(
                    EpisodeFailure(index=index, error=type(exc).__name__, message=str(exc))
                )
    return results


def derive_throughput(log: RunLog) -> float:
    """Whole-run throughput: generated current over elapsed time."""
    if not log.transitions:
        raise InvalidInput("log has no transitions")
    final = log.snapshots[-1].ledger if log.snapshots else None
    generated = final.current_generated_total if final else 0
    return from_micro(generated) / log.transitions[-1].time
