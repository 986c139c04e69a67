"""Exception types shared across the simulator.

Error handling contract: configuration problems surface as ConfigError
before any stepping starts, state corruption detected mid-run surfaces
as InvariantError carrying the name of the violated invariant, and the
CLI maps these to exit codes 1 and 2 respectively.
"""

from __future__ import annotations


class MatesimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(MatesimError):
    """Invalid, contradictory, or unsupported configuration input."""


class IntegrityError(MatesimError):
    """A data structure was mutated into an inconsistent state."""


class InvariantError(MatesimError):
    """A mid-run invariant scan failed.

    Carries the short name of the violated invariant so callers can
    report which guarantee broke without parsing the message.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = f"invariant violated: {invariant}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ComparabilityError(MatesimError):
    """Raised when results from incompatible scenarios are combined."""


class EvaluationError(MatesimError):
    """A policy evaluation run failed; carries the offending seed."""

    def __init__(self, seed: int, detail: str = ""):
        self.seed = seed
        msg = f"evaluation failed for seed {seed}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
