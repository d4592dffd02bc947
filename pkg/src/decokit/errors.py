"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class DecokitError(Exception):
    """Base class for every toolkit error."""


class InputError(DecokitError):
    """Invalid user input: bad token ids, malformed files, out-of-range parameters."""


class TransportError(DecokitError):
    """A backend could not be reached, timed out, or dropped the connection."""


class ProtocolError(DecokitError):
    """A backend answered, but the reply violates the wire contract."""


class GenerationError(DecokitError):
    """A generation loop aborted mid-run.

    Carries the tokens produced before the failure so callers can salvage
    partial output; the original failure is chained as ``__cause__``.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
