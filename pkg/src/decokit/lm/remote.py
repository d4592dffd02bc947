"""Client for model backends speaking the line-delimited JSON protocol.

One request, one reply, each a single JSON object on its own line:

    {"op": "hello"}                          -> {"vocab_size": N, "eod": E, "dim": D}
    {"op": "step", "tokens": [...]}          -> {"probs": [...], "reprs": [[...], ...]}
    {"op": "score", "prefix": [...],
     "continuation": [...]}                  -> {"logprobs": [...]}

``eod`` may be null; ``logprobs`` entries may be null, meaning -inf (JSON has
no Infinity). Failure replies look like {"error": {"code": "input"|"protocol",
"message": ...}}. Connection problems raise TransportError; malformed or
contract-violating replies raise ProtocolError.
"""

from __future__ import annotations

import json
import socket
import threading

import numpy as np

from ..errors import InputError, ProtocolError, TransportError
from .types import StepOutput, TokenSequence, Vocabulary

# Replies whose distribution misses 1 by more than this are protocol errors;
# misses above the strict step() tolerance but under this bound are repaired
# by renormalizing. Closer sums pass through untouched so a loopback server
# returns byte-identical distributions.
REMOTE_SUM_TOLERANCE = 1e-4
STRICT_SUM_TOLERANCE = 1e-6


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    """Split "host:port" into its parts; raises InputError on malformed input."""
    host, sep, port = endpoint.rpartition(":")
    if not sep or not host:
        raise InputError(f"endpoint must look like host:port, got {endpoint!r}")
    try:
        return host, int(port)
    except ValueError:
        raise InputError(f"endpoint port is not an integer: {endpoint!r}") from None


class RemoteModel:
    """A language model behind a stream socket.

    The handshake pins vocabulary size, end-of-document token, and
    representation width; every later reply is checked against them.
    Thread-safe: requests are serialized over the single connection.
    """

    def __init__(self, endpoint: str, *, timeout: float = 10.0):
        host, port = parse_endpoint(endpoint)
        self._endpoint = endpoint
        self._lock = threading.Lock()
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
            self._file = self._sock.makefile("rwb")
        except OSError as err:
            raise TransportError(f"cannot connect to backend {endpoint}: {err}") from err
        hello = self._request({"op": "hello"})
        try:
            size = int(hello["vocab_size"])
            eod = hello.get("eod")
            eod = None if eod is None else int(eod)
            dim = int(hello["dim"])
        except (KeyError, TypeError, ValueError) as err:
            raise ProtocolError(f"malformed handshake from {endpoint}: {hello!r}") from err
        if dim < 1:
            raise ProtocolError(f"backend declared representation width {dim}")
        try:
            self._vocab = Vocabulary(size, eod)
        except InputError as err:
            raise ProtocolError(f"backend declared invalid vocabulary: {err}") from err
        self._dim = dim

    @property
    def vocab(self) -> Vocabulary:
        return self._vocab

    @property
    def representation_dim(self) -> int:
        return self._dim

    def close(self) -> None:
        try:
            self._file.close()
            self._sock.close()
        except OSError:
            pass

    def __enter__(self) -> RemoteModel:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _request(self, payload: dict) -> dict:
        line = json.dumps(payload, allow_nan=False).encode() + b"\n"
        with self._lock:
            try:
                self._file.write(line)
                self._file.flush()
                reply = self._file.readline()
            except OSError as err:
                raise TransportError(f"backend {self._endpoint} failed: {err}") from err
        if not reply:
            raise TransportError(f"backend {self._endpoint} closed the connection")
        try:
            msg = json.loads(reply)
        except json.JSONDecodeError as err:
            raise ProtocolError(f"backend sent invalid JSON: {reply[:200]!r}") from err
        if not isinstance(msg, dict):
            raise ProtocolError(f"backend reply is not an object: {msg!r}")
        if "error" in msg:
            detail = msg["error"]
            code = detail.get("code") if isinstance(detail, dict) else None
            message = detail.get("message") if isinstance(detail, dict) else str(detail)
            if code == "input":
                raise InputError(f"backend rejected request: {message}")
            raise ProtocolError(f"backend error: {message}")
        return msg

    def step(self, context: TokenSequence) -> StepOutput:
        reply = self._request({"op": "step", "tokens": list(context.tokens)})
        try:
            probs = np.asarray(reply["probs"], dtype=np.float64)
            reprs = np.asarray(reply["reprs"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as err:
            raise ProtocolError(f"malformed step reply: {err}") from err
        if probs.shape != (self._vocab.size,):
            raise ProtocolError(
                f"backend sent {probs.shape} probabilities, expected ({self._vocab.size},)"
            )
        if not np.isfinite(probs).all() or np.any(probs < 0.0):
            raise ProtocolError("backend sent non-finite or negative probabilities")
        total = float(probs.sum())
        if abs(total - 1.0) > REMOTE_SUM_TOLERANCE:
            raise ProtocolError(f"backend distribution sums to {total!r}")
        if abs(total - 1.0) > STRICT_SUM_TOLERANCE:
            probs = probs / total
        if reprs.shape != (len(context), self._dim):
            raise ProtocolError(
                f"backend sent representations of shape {reprs.shape}, "
                f"expected ({len(context)}, {self._dim})"
            )
        if not np.isfinite(reprs).all():
            raise ProtocolError("backend sent non-finite representations")
        return StepOutput(probs, reprs)

    def score_sequence(self, prefix: TokenSequence, continuation: TokenSequence) -> np.ndarray:
        reply = self._request(
            {
                "op": "score",
                "prefix": list(prefix.tokens),
                "continuation": list(continuation.tokens),
            }
        )
        raw = reply.get("logprobs")
        if not isinstance(raw, list) or len(raw) != len(continuation):
            raise ProtocolError(
                f"backend sent {0 if not isinstance(raw, list) else len(raw)} "
                f"log-probabilities, expected {len(continuation)}"
            )
        values = np.asarray(
            [-np.inf if v is None else float(v) for v in raw], dtype=np.float64
        )
        if np.isnan(values).any() or np.any(values == np.inf):
            raise ProtocolError("backend sent NaN or +inf log-probabilities")
        return values
