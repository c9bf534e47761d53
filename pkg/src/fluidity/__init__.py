"""Deterministic closed-loop simulator and metric engine for prediction agents.

Agents answer a drifting scalar signal under a token and current budget;
every answer is scored for proportionality, aggregated into the fluidity
index, and classified by economic order and throughput regime. Runs are
reproducible bit for bit and their logs verify by replay.
"""

from .agents import (
    AGENT_KINDS,
    Agent,
    AgentDescriptor,
    PredictionRequest,
    PredictionResponse,
    make_agent,
    predict,
    spawn_external,
)
from .economy import (
    FluidityOrder,
    FluidityRegime,
    OrderIntegrals,
    RegimeKind,
    ResourceLedger,
    accumulate_orders,
    charge_inference,
    classify_order,
    classify_regime,
    ledger_conserved,
    new_ledger,
    reserve_growth_satisfied,
    second_order_satisfied,
    settle_replenishment,
    throughput,
)
from .environment import (
    DeltaDistribution,
    EnvironmentState,
    GrowthRule,
    Observation,
    StateTransition,
    TransitionSchedule,
    apply_transition,
    default_schedule,
    generate_transitions,
    init_environment,
    observe,
    transitions_for_epoch,
)
from .errors import (
    AgentFault,
    AgentUnavailable,
    BudgetExhausted,
    CurrentExhausted,
    DegenerateTransition,
    FluidityError,
    IntegrityError,
    InvalidEpoch,
    InvalidInput,
    InvalidInterval,
    InvalidSchedule,
    NoChangesRecorded,
    ProtocolError,
    SequenceError,
    ZeroInterval,
)
from .harness import (
    REASON_BUDGET,
    REASON_CURRENT,
    REASON_FAULT,
    EpisodeFailure,
    RunLog,
    ScenarioConfig,
    Snapshot,
    batch,
    derive_throughput,
    replay,
    run_episode,
)
from .metrics import (
    AdaptationSample,
    FISummary,
    accuracy_adaptation,
    fluidity_index,
    make_sample,
    responsiveness_score,
    summarize,
)
from .runlog import load_run_log, load_scenario, run_log_from_text, serialize_run_log, write_run_log

__version__ = "0.1.0"

__all__ = [
    "AGENT_KINDS",
    "AdaptationSample",
    "Agent",
    "AgentDescriptor",
    "AgentFault",
    "AgentUnavailable",
    "BudgetExhausted",
    "CurrentExhausted",
    "DegenerateTransition",
    "DeltaDistribution",
    "EnvironmentState",
    "EpisodeFailure",
    "FISummary",
    "FluidityError",
    "FluidityOrder",
    "FluidityRegime",
    "GrowthRule",
    "IntegrityError",
    "InvalidEpoch",
    "InvalidInput",
    "InvalidInterval",
    "InvalidSchedule",
    "NoChangesRecorded",
    "Observation",
    "OrderIntegrals",
    "PredictionRequest",
    "PredictionResponse",
    "ProtocolError",
    "REASON_BUDGET",
    "REASON_CURRENT",
    "REASON_FAULT",
    "RegimeKind",
    "ResourceLedger",
    "RunLog",
    "ScenarioConfig",
    "SequenceError",
    "Snapshot",
    "StateTransition",
    "TransitionSchedule",
    "ZeroInterval",
    "accumulate_orders",
    "accuracy_adaptation",
    "apply_transition",
    "batch",
    "charge_inference",
    "classify_order",
    "classify_regime",
    "default_schedule",
    "derive_throughput",
    "fluidity_index",
    "generate_transitions",
    "init_environment",
    "ledger_conserved",
    "load_run_log",
    "load_scenario",
    "make_agent",
    "make_sample",
    "new_ledger",
    "observe",
    "predict",
    "replay",
    "reserve_growth_satisfied",
    "responsiveness_score",
    "run_episode",
    "run_log_from_text",
    "second_order_satisfied",
    "serialize_run_log",
    "settle_replenishment",
    "spawn_external",
    "summarize",
    "throughput",
    "transitions_for_epoch",
    "write_run_log",
]
