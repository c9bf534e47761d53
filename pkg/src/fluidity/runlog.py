"""Run-log and scenario serialization.

One run produces one canonical JSON document: sorted keys, compact
separators, a trailing newline. Floats serialize through repr (shortest
round-trip) and ledger current fields are micro integers, so identical runs
produce identical bytes and every value survives a round trip unchanged.

Loading re-validates as it parses: samples must recompute their own scores
and ledgers must conserve, so a tampered document fails with IntegrityError
naming the offending element.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .agents import AgentDescriptor
from .economy import (
    FluidityOrder,
    FluidityRegime,
    OrderIntegrals,
    RegimeKind,
    ResourceLedger,
)
from .environment import (
    DeltaDistribution,
    EnvironmentState,
    GrowthRule,
    StateTransition,
    TransitionSchedule,
)
from .errors import FluidityError, IntegrityError, InvalidInput
from .harness import RunLog, ScenarioConfig, Snapshot
from .metrics import AdaptationSample, FISummary

FORMAT_NAME = "fluidity-run-log"
FORMAT_VERSION = 1


def _growth_to_dict(growth: GrowthRule) -> dict[str, Any]:
    if growth.kind == "linear":
        return {"kind": "linear", "increment": growth.increment}
    return {"kind": "geometric", "factor": growth.factor}


def _distribution_to_dict(dist: DeltaDistribution) -> dict[str, Any]:
    if dist.kind == "fixed_step":
        return {"kind": "fixed_step", "step": dist.step}
    return {"kind": dist.kind, "low": dist.low, "high": dist.high}


def _schedule_to_dict(schedule: TransitionSchedule) -> dict[str, Any]:
    return {
        "base_rate": schedule.base_rate,
        "growth": _growth_to_dict(schedule.growth),
        "epochs": schedule.epochs,
        "delta_distribution": _distribution_to_dict(schedule.delta_distribution),
        "initial_signal": schedule.initial_signal,
    }


def config_to_dict(config: ScenarioConfig) -> dict[str, Any]:
    return {
        "schedule": _schedule_to_dict(config.schedule),
        "agent": {"kind": config.agent.kind, "parameters": dict(config.agent.parameters)},
        "seed": config.seed,
        "initial_tokens": config.initial_tokens,
        "initial_funding": config.initial_funding,
        "conversion_rate": config.conversion_rate,
        "inference_cost_rate": config.inference_cost_rate,
        "payout_scale": config.payout_scale,
        "auto_repurchase": config.auto_repurchase,
        "epsilon": config.epsilon,
    }


def _transition_to_dict(tr: StateTransition) -> dict[str, Any]:
    return {
        "index": tr.index,
        "epoch": tr.epoch,
        "delta": tr.delta,
        "magnitude": tr.magnitude,
        "time": tr.time,
    }


def _environment_to_dict(env: EnvironmentState) -> dict[str, Any]:
    return {
        "epoch": env.epoch,
        "time": env.time,
        "signal": env.signal,
        "transitions_applied": env.transitions_applied,
    }


def _ledger_to_dict(ledger: ResourceLedger) -> dict[str, Any]:
    return {
        "tokens_available": ledger.tokens_available,
        "tokens_spent_total": ledger.tokens_spent_total,
        "current_generated_total": ledger.current_generated_total,
        "current_consumed_total": ledger.current_consumed_total,
        "reserve": ledger.reserve,
        "external_funding_total": ledger.external_funding_total,
        "conversion_rate": ledger.conversion_rate,
        "inference_cost_rate": ledger.inference_cost_rate,
    }


def _snapshot_to_dict(snap: Snapshot) -> dict[str, Any]:
    return {
        "index": snap.index,
        "time": snap.time,
        "environment": _environment_to_dict(snap.environment),
        "prediction_old": snap.prediction_old,
        "prediction_new": snap.prediction_new,
        "tokens_used": snap.tokens_used,
        "ledger": _ledger_to_dict(snap.ledger),
        "prefix_fi": snap.prefix_fi,
    }


def _sample_to_dict(sample: AdaptationSample) -> dict[str, Any]:
    return {
        "transition_index": sample.transition_index,
        "old_prediction": sample.old_prediction,
        "new_prediction": sample.new_prediction,
        "env_delta": sample.env_delta,
        "aa_value": sample.aa_value,
    }


def _summary_to_dict(summary: FISummary) -> dict[str, Any]:
    return {
        "fi_value": summary.fi_value,
        "nc": summary.nc,
        "sample_count": summary.sample_count,
        "mean_responsiveness": summary.mean_responsiveness,
        "min_aa": summary.min_aa,
        "max_aa": summary.max_aa,
    }


def log_to_dict(log: RunLog) -> dict[str, Any]:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config": config_to_dict(log.config),
        "transitions": [_transition_to_dict(tr) for tr in log.transitions],
        "snapshots": [_snapshot_to_dict(s) for s in log.snapshots],
        "samples": [_sample_to_dict(s) for s in log.samples],
        "summary": _summary_to_dict(log.summary),
        "integrals": {"i1": log.integrals.i1, "i2": log.integrals.i2, "i3": log.integrals.i3},
        "order": log.order.value,
        "regime": {"kind": log.regime.kind.value, "epsilon": log.regime.epsilon},
        "truncated": log.truncated,
        "truncated_reason": log.truncated_reason,
        "skipped_transitions": log.skipped_transitions,
    }


def serialize_run_log(log: RunLog) -> str:
    """Canonical text form of a run log; identical logs give identical bytes."""
    return json.dumps(log_to_dict(log), sort_keys=True, separators=(",", ":")) + "\n"


def write_run_log(log: RunLog, path: str | Path) -> None:
    Path(path).write_text(serialize_run_log(log), encoding="utf-8")


class _Reader:
    """Typed field access over parsed JSON, with located errors."""

    def __init__(self, data: Any, location: str, error: type[FluidityError]) -> None:
        if not isinstance(data, dict):
            raise error(f"{location}: expected an object, got {type(data).__name__}")
        self.data = data
        self.location = location
        self.error = error

    def _fail(self, message: str) -> Exception:
        if self.error is IntegrityError:
            return IntegrityError(self.location, message)
        return self.error(f"{self.location}: {message}")

    def child(self, key: str) -> "_Reader":
        return _Reader(self.require(key, dict), f"{self.location}.{key}", self.error)

    def require(self, key: str, kind: type | tuple[type, ...]) -> Any:
        if key not in self.data:
            raise self._fail(f"missing field {key!r}")
        value = self.data[key]
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise self._fail(f"field {key!r} must be a number, got {value!r}")
            return float(value)
        if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
            raise self._fail(f"field {key!r} must be an integer, got {value!r}")
        if not isinstance(value, kind):
            raise self._fail(f"field {key!r} has the wrong type: {value!r}")
        return value

    def optional(self, key: str, default: Any = None) -> Any:
        return self.data.get(key, default)

    def list_of(self, key: str) -> list[Any]:
        return self.require(key, list)


def _growth_from(reader: _Reader) -> GrowthRule:
    kind = reader.require("kind", str)
    if kind == "linear":
        return GrowthRule(kind="linear", increment=reader.require("increment", int))
    if kind == "geometric":
        return GrowthRule(kind="geometric", factor=reader.require("factor", float))
    raise reader._fail(f"unknown growth kind {kind!r}")


def _distribution_from(reader: _Reader) -> DeltaDistribution:
    kind = reader.require("kind", str)
    if kind == "fixed_step":
        return DeltaDistribution(kind="fixed_step", step=reader.require("step", float))
    if kind in ("uniform", "uniform_int"):
        low = reader.require("low", float)
        high = reader.require("high", float)
        if kind == "uniform_int":
            # integer grid values arrive as JSON numbers; keep them integral
            low, high = int(low), int(high)
        return DeltaDistribution(kind=kind, low=low, high=high)
    raise reader._fail(f"unknown delta distribution kind {kind!r}")


def _schedule_from(reader: _Reader) -> TransitionSchedule:
    return TransitionSchedule(
        base_rate=reader.require("base_rate", int),
        growth=_growth_from(reader.child("growth")),
        epochs=reader.require("epochs", int),
        delta_distribution=_distribution_from(reader.child("delta_distribution")),
        initial_signal=reader.require("initial_signal", float)
        if "initial_signal" in reader.data
        else 0.0,
    )


def _config_from(reader: _Reader) -> ScenarioConfig:
    agent = reader.child("agent")
    parameters = agent.optional("parameters", {})
    if not isinstance(parameters, dict):
        raise agent._fail(f"parameters must be an object, got {parameters!r}")
    return ScenarioConfig(
        schedule=_schedule_from(reader.child("schedule")),
        agent=AgentDescriptor(kind=agent.require("kind", str), parameters=parameters),
        seed=reader.require("seed", int),
        initial_tokens=reader.require("initial_tokens", int),
        initial_funding=reader.require("initial_funding", float),
        conversion_rate=reader.require("conversion_rate", float),
        inference_cost_rate=reader.require("inference_cost_rate", float),
        payout_scale=reader.require("payout_scale", float),
        auto_repurchase=reader.require("auto_repurchase", bool),
        epsilon=reader.require("epsilon", float),
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse a scenario file into a config; all validation applies."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"scenario {path} is not valid JSON: {exc}") from exc
    return _config_from(_Reader(data, "scenario", InvalidInput))


def _transition_from(reader: _Reader) -> StateTransition:
    return StateTransition(
        index=reader.require("index", int),
        epoch=reader.require("epoch", int),
        delta=reader.require("delta", float),
        magnitude=reader.require("magnitude", float),
        time=reader.require("time", float),
    )


def _environment_from(reader: _Reader) -> EnvironmentState:
    return EnvironmentState(
        epoch=reader.require("epoch", int),
        time=reader.require("time", float),
        signal=reader.require("signal", float),
        transitions_applied=reader.require("transitions_applied", int),
    )


def _ledger_from(reader: _Reader) -> ResourceLedger:
    return ResourceLedger(
        tokens_available=reader.require("tokens_available", int),
        tokens_spent_total=reader.require("tokens_spent_total", int),
        current_generated_total=reader.require("current_generated_total", int),
        current_consumed_total=reader.require("current_consumed_total", int),
        reserve=reader.require("reserve", int),
        external_funding_total=reader.require("external_funding_total", int),
        conversion_rate=reader.require("conversion_rate", int),
        inference_cost_rate=reader.require("inference_cost_rate", int),
    )


def _snapshot_from(reader: _Reader) -> Snapshot:
    return Snapshot(
        index=reader.require("index", int),
        time=reader.require("time", float),
        environment=_environment_from(reader.child("environment")),
        prediction_old=reader.require("prediction_old", float),
        prediction_new=reader.require("prediction_new", float),
        tokens_used=reader.require("tokens_used", int),
        ledger=_ledger_from(reader.child("ledger")),
        prefix_fi=reader.require("prefix_fi", float),
    )


def _sample_from(reader: _Reader) -> AdaptationSample:
    return AdaptationSample(
        transition_index=reader.require("transition_index", int),
        old_prediction=reader.require("old_prediction", float),
        new_prediction=reader.require("new_prediction", float),
        env_delta=reader.require("env_delta", float),
        aa_value=reader.require("aa_value", float),
    )


def _summary_from(reader: _Reader) -> FISummary:
    return FISummary(
        fi_value=reader.require("fi_value", float),
        nc=reader.require("nc", int),
        sample_count=reader.require("sample_count", int),
        mean_responsiveness=reader.require("mean_responsiveness", float),
        min_aa=reader.require("min_aa", float),
        max_aa=reader.require("max_aa", float),
    )


def run_log_from_text(text: str, *, source: str = "run log") -> RunLog:
    """Parse and validate a serialized run log; tampering raises IntegrityError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IntegrityError(source, f"not valid JSON: {exc}") from exc
    root = _Reader(data, source, IntegrityError)
    if root.optional("format") != FORMAT_NAME:
        raise IntegrityError(source, f"not a {FORMAT_NAME} document")
    if root.optional("version") != FORMAT_VERSION:
        raise IntegrityError(source, f"unsupported version {root.optional('version')!r}")
    try:
        config = _config_from(_Reader(root.require("config", dict), "config", InvalidInput))
    except IntegrityError:
        raise
    except FluidityError as exc:
        raise IntegrityError("config", str(exc)) from exc

    def parse_each(key: str, parse: Any) -> list[Any]:
        out = []
        for i, item in enumerate(root.list_of(key)):
            location = f"{key}[{i}]"
            try:
                out.append(parse(_Reader(item, location, IntegrityError)))
            except IntegrityError:
                raise
            except FluidityError as exc:
                raise IntegrityError(location, str(exc)) from exc
        return out

    transitions = parse_each("transitions", _transition_from)
    snapshots = parse_each("snapshots", _snapshot_from)
    samples = parse_each("samples", _sample_from)
    try:
        summary = _summary_from(root.child("summary"))
    except FluidityError as exc:
        if isinstance(exc, IntegrityError):
            raise
        raise IntegrityError("summary", str(exc)) from exc
    integrals_reader = root.child("integrals")
    try:
        integrals = OrderIntegrals(
            i1=integrals_reader.require("i1", float),
            i2=integrals_reader.require("i2", float),
            i3=integrals_reader.require("i3", float),
        )
    except FluidityError as exc:
        if isinstance(exc, IntegrityError):
            raise
        raise IntegrityError("integrals", str(exc)) from exc
    order_value = root.require("order", str)
    try:
        order = FluidityOrder(order_value)
    except ValueError as exc:
        raise IntegrityError("order", f"unknown order {order_value!r}") from exc
    regime_reader = root.child("regime")
    kind_value = regime_reader.require("kind", str)
    try:
        regime_kind = RegimeKind(kind_value)
    except ValueError as exc:
        raise IntegrityError("regime.kind", f"unknown regime {kind_value!r}") from exc
    try:
        regime = FluidityRegime(kind=regime_kind, epsilon=regime_reader.require("epsilon", float))
    except FluidityError as exc:
        if isinstance(exc, IntegrityError):
            raise
        raise IntegrityError("regime", str(exc)) from exc
    truncated = root.require("truncated", bool)
    reason = root.optional("truncated_reason")
    if reason is not None and not isinstance(reason, str):
        raise IntegrityError("truncated_reason", f"must be a string or null, got {reason!r}")
    skipped = root.require("skipped_transitions", int)
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


def load_run_log(path: str | Path) -> RunLog:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IntegrityError(str(path), f"cannot read run log: {exc}") from exc
    return run_log_from_text(text, source=str(path))
