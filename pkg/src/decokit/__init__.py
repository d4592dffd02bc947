"""Decoding strategies and evaluation tools for open-ended generation."""

from .errors import (
    DecokitError,
    GenerationError,
    InputError,
    ProtocolError,
    TransportError,
)

__version__ = "0.1.0"

__all__ = [
    "DecokitError",
    "GenerationError",
    "InputError",
    "ProtocolError",
    "TransportError",
    "__version__",
]
