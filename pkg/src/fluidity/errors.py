"""Exception hierarchy shared across the package.

Every error raised by this package derives from FluidityError so callers can
catch the whole family with one clause. Subclasses mark distinct failure modes
rather than carrying structured payloads, with the exception of IntegrityError
which records where in a run log the divergence sits.
"""

from __future__ import annotations


class FluidityError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(FluidityError):
    """An argument violates a precondition (non-finite, negative, wrong type)."""


class DegenerateTransition(FluidityError):
    """A zero-magnitude change was used where a nonzero denominator is required."""


class NoChangesRecorded(FluidityError):
    """The fluidity index is undefined when no environment change was counted."""


class InvalidSchedule(FluidityError):
    """A transition schedule fails static validation."""


class InvalidEpoch(FluidityError):
    """An epoch index lies outside the schedule."""


class SequenceError(FluidityError):
    """Events were presented out of order."""


class BudgetExhausted(FluidityError):
    """Not enough inference tokens to cover the requested spend."""


class CurrentExhausted(FluidityError):
    """A consumption would drive the current reserve negative."""


class ZeroInterval(FluidityError):
    """Throughput over a zero-length time interval is undefined."""


class InvalidInterval(FluidityError):
    """A negative time interval was supplied."""


class AgentUnavailable(FluidityError):
    """An external agent process could not be started."""


class AgentFault(FluidityError):
    """An agent failed mid-run (died, timed out, or broke the protocol)."""


class ProtocolError(AgentFault):
    """An external agent violated the message protocol (ordering or schema)."""


class IntegrityError(FluidityError):
    """A run log does not verify against recomputation.

    ``location`` names the first divergent element, e.g. ``samples[3]`` or
    ``snapshots[4].prefix_fi``.
    """

    def __init__(self, location: str, message: str) -> None:
        super().__init__(f"{location}: {message}")
        self.location = location
