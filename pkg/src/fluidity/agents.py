"""Prediction agents: built-in strategies and the external process adapter.

Built-ins are deterministic given (seed, history) and spend a fixed per-call
token cost (default 1). External agents run as child processes speaking
line-delimited JSON over stdin/stdout:

    -> {"type": "hello", "protocol": 1}
    <- {"type": "ready", "name": "<agent name>"}
    -> {"type": "predict", "signal": <num>, "epoch": <int>, "time": <num>, "budget": <int>}
    <- {"type": "prediction", "value": <num>, "tokens_used": <int>}
    -> {"type": "bye"}

Unknown fields in any message are ignored. Ordering or schema violations
raise ProtocolError; a dead or silent process raises AgentFault.
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass, field
from typing import IO, Mapping

from . import rng
from .environment import Observation
from .errors import (
    AgentFault,
    AgentUnavailable,
    BudgetExhausted,
    InvalidInput,
    ProtocolError,
)

PROTOCOL_VERSION = 1

#: Seconds an external agent may take to answer any single message.
DEFAULT_TIMEOUT = 10.0

#: Seconds to wait for a child to exit after "bye" before it is killed.
_SHUTDOWN_WAIT = 2.0

_NOISE_STREAM = "agent_noise"


@dataclass(frozen=True, slots=True)
class PredictionRequest:
    """One query to an agent: the observation plus the spendable budget."""

    observation: Observation
    token_budget: int

    def __post_init__(self) -> None:
        if not isinstance(self.observation, Observation):
            raise InvalidInput(f"observation must be an Observation, got {self.observation!r}")
        if not isinstance(self.token_budget, int) or isinstance(self.token_budget, bool):
            raise InvalidInput(f"token_budget must be an int, got {self.token_budget!r}")
        if self.token_budget < 0:
            raise InvalidInput(f"token_budget must be >= 0, got {self.token_budget}")


@dataclass(frozen=True, slots=True)
class PredictionResponse:
    """An agent's answer: the prediction and what it cost."""

    prediction: float
    tokens_used: int

    def __post_init__(self) -> None:
        if not (isinstance(self.prediction, (int, float)) and math.isfinite(self.prediction)):
            raise InvalidInput(f"prediction must be finite, got {self.prediction!r}")
        if not isinstance(self.tokens_used, int) or isinstance(self.tokens_used, bool):
            raise InvalidInput(f"tokens_used must be an int, got {self.tokens_used!r}")
        if self.tokens_used < 1:
            raise InvalidInput(f"tokens_used must be >= 1, got {self.tokens_used}")


#: Agent kinds and the parameters each accepts (defaults shown).
AGENT_KINDS: dict[str, dict[str, object]] = {
    "static": {"initial": "initial signal", "cost": 1},
    "proportional": {"gain": 1.0, "initial": "initial signal", "cost": 1},
    "lagged": {"lag": 1, "initial": "initial signal", "cost": 1},
    "overcorrector": {"gain": 1.5, "initial": "initial signal", "cost": 1},
    "noisy": {"noise_scale": 1.0, "cost": 1},
    "external": {"command": "required", "timeout": DEFAULT_TIMEOUT},
}


@dataclass(frozen=True)
class AgentDescriptor:
    """Portable description of an agent: a kind plus its parameters."""

    kind: str
    parameters: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in AGENT_KINDS:
            raise InvalidInput(
                f"unknown agent kind {self.kind!r}; known kinds: {sorted(AGENT_KINDS)}"
            )
        if not isinstance(self.parameters, Mapping):
            raise InvalidInput(f"parameters must be a mapping, got {self.parameters!r}")
        if self.kind == "external" and "command" not in self.parameters:
            raise InvalidInput("external agents need a 'command' parameter")


def _param_float(params: Mapping[str, object], name: str, default: float) -> float:
    value = params.get(name, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidInput(f"agent parameter {name!r} must be a finite number, got {value!r}")
    return float(value)


def _param_int(params: Mapping[str, object], name: str, default: int, minimum: int) -> int:
    value = params.get(name, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidInput(f"agent parameter {name!r} must be an int, got {value!r}")
    if value < minimum:
        raise InvalidInput(f"agent parameter {name!r} must be >= {minimum}, got {value}")
    return value


class Agent:
    """Base class: one predict() per environment change, then close()."""

    name = "agent"

    def __init__(self, *, cost: int = 1) -> None:
        if cost < 1:
            raise InvalidInput(f"per-call cost must be >= 1, got {cost}")
        self.call_cost = cost

    def _require_budget(self, request: PredictionRequest) -> None:
        if request.token_budget < self.call_cost:
            raise BudgetExhausted(
                f"per-call cost {self.call_cost} exceeds budget {request.token_budget}"
            )

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        raise NotImplementedError

    def close(self) -> None:
        """Release any resources; the default agent holds none."""


class StaticAgent(Agent):
    """Never moves: answers its initial prediction forever."""

    name = "static"

    def __init__(self, *, initial_prediction: float, cost: int = 1) -> None:
        super().__init__(cost=cost)
        self._prediction = float(initial_prediction)

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        self._require_budget(request)
        return PredictionResponse(prediction=self._prediction, tokens_used=self.call_cost)


class ProportionalAgent(Agent):
    """Moves its prediction by ``gain`` times each observed signal change."""

    name = "proportional"

    def __init__(
        self, *, initial_prediction: float, initial_signal: float, gain: float, cost: int = 1
    ) -> None:
        super().__init__(cost=cost)
        self._prediction = float(initial_prediction)
        self._last_signal = float(initial_signal)
        self.gain = float(gain)

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        self._require_budget(request)
        observed = request.observation.signal
        step = observed - self._last_signal
        self._last_signal = observed
        self._prediction = self._prediction + self.gain * step
        return PredictionResponse(prediction=self._prediction, tokens_used=self.call_cost)


class LaggedAgent(Agent):
    """Applies each observed change ``lag`` queries late."""

    name = "lagged"

    def __init__(
        self, *, initial_prediction: float, initial_signal: float, lag: int, cost: int = 1
    ) -> None:
        super().__init__(cost=cost)
        if lag < 1:
            raise InvalidInput(f"lag must be >= 1, got {lag}")
        self._prediction = float(initial_prediction)
        self._last_signal = float(initial_signal)
        self.lag = lag
        self._steps: list[float] = []

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        self._require_budget(request)
        observed = request.observation.signal
        self._steps.append(observed - self._last_signal)
        self._last_signal = observed
        if len(self._steps) > self.lag:
            self._prediction = self._prediction + self._steps[-1 - self.lag]
        return PredictionResponse(prediction=self._prediction, tokens_used=self.call_cost)


class NoisyAgent(Agent):
    """Tracks the signal exactly, then perturbs it with seeded noise.

    Noise draws come from the shared counter-based generator under a stream
    label of their own, so they never collide with environment draws.
    """

    name = "noisy"

    def __init__(self, *, seed: int, noise_scale: float, cost: int = 1) -> None:
        super().__init__(cost=cost)
        if noise_scale < 0:
            raise InvalidInput(f"noise_scale must be >= 0, got {noise_scale}")
        self._seed = seed
        self._scale = float(noise_scale)
        self._calls = 0

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        self._require_budget(request)
        u = rng.unit(self._seed, _NOISE_STREAM, self._calls)
        self._calls += 1
        noise = self._scale * (2.0 * u - 1.0)
        return PredictionResponse(
            prediction=request.observation.signal + noise, tokens_used=self.call_cost
        )


class ExternalAgent(Agent):
    """Adapter around a child process speaking the line protocol.

    The child's stdout is drained by a reader thread so every receive can be
    bounded by the configured timeout regardless of how the child writes.
    """

    name = "external"

    def __init__(self, command: list[str], *, timeout: float = DEFAULT_TIMEOUT) -> None:
        super().__init__(cost=1)
        if timeout <= 0 or not math.isfinite(timeout):
            raise InvalidInput(f"timeout must be a positive number, got {timeout!r}")
        self.timeout = timeout
        try:
            self._proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise AgentUnavailable(f"could not start {command!r}: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(
            target=_drain_lines, args=(self._proc.stdout, self._lines), daemon=True
        )
        self._reader.start()
        self._closed = False
        try:
            self._send({"type": "hello", "protocol": PROTOCOL_VERSION})
            ready = self._recv()
            if ready.get("type") != "ready" or not isinstance(ready.get("name"), str):
                raise ProtocolError(f"expected a ready message with a name, got {ready!r}")
            self.name = ready["name"]
        except Exception:
            self._terminate()
            raise

    def _send(self, message: dict[str, object]) -> None:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(message) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AgentFault(f"agent process is not accepting input: {exc}") from exc

    def _recv(self) -> dict[str, object]:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise AgentFault(f"agent did not answer within {self.timeout} s") from None
        if line is None:
            raise AgentFault("agent process exited before answering")
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"agent sent malformed JSON: {line!r}") from exc
        if not isinstance(message, dict):
            raise ProtocolError(f"agent messages must be JSON objects, got {line!r}")
        return message

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        self._require_budget(request)
        obs = request.observation
        self._send(
            {
                "type": "predict",
                "signal": obs.signal,
                "epoch": obs.epoch,
                "time": obs.time,
                "budget": request.token_budget,
            }
        )
        message = self._recv()
        if message.get("type") != "prediction":
            raise ProtocolError(f"expected a prediction message, got {message!r}")
        value = message.get("value")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ProtocolError(f"prediction value must be a finite number, got {value!r}")
        tokens = message.get("tokens_used")
        if isinstance(tokens, bool) or not isinstance(tokens, int):
            raise ProtocolError(f"tokens_used must be an integer, got {tokens!r}")
        # self-reported spend, clamped into [1, budget]
        tokens = max(1, min(tokens, request.token_budget))
        return PredictionResponse(prediction=float(value), tokens_used=tokens)

    def _terminate(self) -> None:
        if self._proc.poll() is None:
            self._proc.kill()
        self._proc.wait()
        if self._proc.stdin is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        if self._proc.poll() is None:
            try:
                self._send({"type": "bye"})
                if self._proc.stdin is not None:
                    self._proc.stdin.close()
            except (AgentFault, OSError):
                pass
            try:
                self._proc.wait(timeout=_SHUTDOWN_WAIT)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._terminate()


def _drain_lines(stream: IO[str] | None, sink: queue.Queue[str | None]) -> None:
    assert stream is not None
    try:
        for line in stream:
            sink.put(line)
    except ValueError:
        pass  # stream closed under the reader
    finally:
        sink.put(None)


def _command_argv(parameters: Mapping[str, object]) -> list[str]:
    command = parameters.get("command")
    if isinstance(command, str):
        argv = shlex.split(command)
    elif isinstance(command, (list, tuple)) and all(isinstance(c, str) for c in command):
        argv = list(command)
    else:
        raise InvalidInput(f"'command' must be a string or list of strings, got {command!r}")
    if not argv:
        raise InvalidInput("'command' must not be empty")
    return argv


def spawn_external(descriptor: AgentDescriptor) -> ExternalAgent:
    """Start an external agent and complete the handshake."""
    if descriptor.kind != "external":
        raise InvalidInput(f"spawn_external needs an external descriptor, got {descriptor.kind!r}")
    timeout = _param_float(descriptor.parameters, "timeout", DEFAULT_TIMEOUT)
    return ExternalAgent(_command_argv(descriptor.parameters), timeout=timeout)


def initial_prediction_for(descriptor: AgentDescriptor, initial_signal: float) -> float:
    """The prediction in force before an agent's first answer."""
    value = _param_float(descriptor.parameters, "initial", float(initial_signal))
    return value


def make_agent(descriptor: AgentDescriptor, *, initial_signal: float, seed: int) -> Agent:
    """Instantiate any agent kind from its descriptor."""
    params = descriptor.parameters
    if descriptor.kind == "external":
        return spawn_external(descriptor)
    cost = _param_int(params, "cost", 1, 1)
    initial = initial_prediction_for(descriptor, initial_signal)
    if descriptor.kind == "static":
        return StaticAgent(initial_prediction=initial, cost=cost)
    if descriptor.kind == "proportional":
        gain = _param_float(params, "gain", 1.0)
        return ProportionalAgent(
            initial_prediction=initial, initial_signal=initial_signal, gain=gain, cost=cost
        )
    if descriptor.kind == "overcorrector":
        gain = _param_float(params, "gain", 1.5)
        agent = ProportionalAgent(
            initial_prediction=initial, initial_signal=initial_signal, gain=gain, cost=cost
        )
        agent.name = "overcorrector"
        return agent
    if descriptor.kind == "lagged":
        lag = _param_int(params, "lag", 1, 1)
        return LaggedAgent(
            initial_prediction=initial, initial_signal=initial_signal, lag=lag, cost=cost
        )
    if descriptor.kind == "noisy":
        noise_scale = _param_float(params, "noise_scale", 1.0)
        return NoisyAgent(seed=seed, noise_scale=noise_scale, cost=cost)
    raise InvalidInput(f"unknown agent kind {descriptor.kind!r}")


def predict(agent: Agent, request: PredictionRequest) -> PredictionResponse:
    """Query an agent; module-level spelling of ``agent.predict(request)``."""
    return agent.predict(request)
