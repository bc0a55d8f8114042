"""Common types, type aliases, errors & configuration defaults."""

import os
from typing import Optional

# Type aliases
ElementId = int
Ordering = tuple[int, ...]

# Environment variables read for configuration defaults.
ENV_CAP = "RINGSPECTRA_CAP"
ENV_SWEEP_LIMIT = "RINGSPECTRA_SWEEP_LIMIT"

DEFAULT_CAP = 4096
DEFAULT_SWEEP_LIMIT = 200_000
# Above this matrix size the dense characteristic polynomial is not used as a
# cross-check of the low-rank one.
DEFAULT_DENSE_LIMIT = 512
# Rings up to this order get exhaustive axiom checks, larger ones sampled.
EXHAUSTIVE_AXIOM_ORDER = 256


class RingSpectraError(Exception):
    """Base class of the errors raised for invalid input or unmet hypotheses."""


class InvalidInputError(RingSpectraError, ValueError):
    """Invalid parameter or element index."""


class SpecParseError(InvalidInputError):
    """A ring spec or polynomial string could not be parsed."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in '{text}'.")
        self.text = text
        self.position = position


class CapExceededError(InvalidInputError):
    """A ring would be larger than the configured order cap."""


class NotInvertibleError(RingSpectraError):
    """The element has no multiplicative inverse."""


class NotLocalError(RingSpectraError):
    """The ring is not local, i.e., its non-units aren't closed under addition."""


class HypothesisError(RingSpectraError):
    """A precondition of a theorem or a construction is violated."""


class PlanError(RingSpectraError):
    """An ordering plan is inapplicable, or a sweep plan is invalid."""


class UnsupportedMatrixError(RingSpectraError):
    """The matrix is not of a form the requested algorithm supports."""


class PreconditionError(RingSpectraError):
    """A matrix identity was applied outside of its preconditions."""


def _int_from_env(name: str, default: int) -> int:
    value = os.environ.get(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError as e:
        raise InvalidInputError(
            f"Environment variable {name} must be an integer, got '{value}'."
        ) from e


def default_cap() -> int:
    """Order cap for ring construction. Defaults to 4096, overridden by the
    environment variable RINGSPECTRA_CAP.
    """
    return _int_from_env(ENV_CAP, DEFAULT_CAP)


def default_sweep_limit() -> int:
    """Upper bound for the summed ring orders of a sweep. Overridden by the
    environment variable RINGSPECTRA_SWEEP_LIMIT.
    """
    return _int_from_env(ENV_SWEEP_LIMIT, DEFAULT_SWEEP_LIMIT)


def resolve_cap(cap: Optional[int]) -> int:
    """Return cap, or the default cap if cap is None."""
    return default_cap() if cap is None else cap
