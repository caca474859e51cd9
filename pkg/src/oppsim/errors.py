"""Exception types shared across the simulator.

Every error raised on a bad input or a broken invariant is a subclass of
OppsimError so callers (and the CLI) can distinguish "your input is wrong"
from a genuine bug in the engine.
"""

from __future__ import annotations


class OppsimError(Exception):
    """Base class for all simulator errors."""


# --- trace ingestion ---------------------------------------------------

class MalformedRow(OppsimError):
    """A CSV row (or header) could not be parsed into a power sample."""


class NonUniformStep(OppsimError):
    """Trace timestamps are not spaced by a single uniform step."""


class NegativePower(OppsimError):
    """A trace reports negative available power."""


class OutOfRange(OppsimError):
    """A query time falls outside the span covered by a trace."""


class MisalignedTraces(OppsimError):
    """An operation over several traces requires a shared time grid."""


class InvalidWindow(OppsimError):
    """A requested time window is empty or reversed."""


# --- fleet / network ---------------------------------------------------

class CoreOverflow(OppsimError):
    """More active cores requested than a server physically has."""


class CapacityExceeded(OppsimError):
    """Required fabric bandwidth exceeds what the installed switches provide."""


# --- workload ----------------------------------------------------------

class CyclicDependency(OppsimError):
    """A job's dependency edges contain a cycle."""

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("dependency cycle: " + " -> ".join(self.cycle))


class UnknownTask(OppsimError):
    """A task id was referenced that the job does not define."""


# --- forecasting -------------------------------------------------------

class InsufficientHistory(OppsimError):
    """Not enough trace history to fit the requested estimator."""


# --- scheduling --------------------------------------------------------

class InfeasibleSlo(OppsimError):
    """No site can ever satisfy the job's renewable-fraction floor."""


class AlreadyLate(OppsimError):
    """The latest safe start time for a migration is already in the past."""


class ColdStorageFull(OppsimError):
    """A frozen snapshot does not fit in the site's cold storage."""


class SearchSpaceTooLarge(OppsimError):
    """The exhaustive scheduler cannot enumerate this instance."""


# --- engine / config ---------------------------------------------------

class TimeRegression(OppsimError):
    """The event queue yielded an event earlier than the current clock."""


class ConfigError(OppsimError):
    """A scenario file failed validation.

    ``path`` points at the offending field, e.g. ``sites[0].trace_ref``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
