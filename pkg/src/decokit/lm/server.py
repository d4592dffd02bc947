"""Serve a local model over the line-delimited JSON protocol.

Counterpart to `remote.RemoteModel`; see that module for the wire format.
Intended for loopback testing and for exposing toy models to other
processes, not for hostile networks.
"""

from __future__ import annotations

import json
import logging
import socketserver

import numpy as np

from ..errors import InputError
from .types import LanguageModel, TokenSequence, score_sequence, step

logger = logging.getLogger(__name__)


def _representation_dim(model: LanguageModel) -> int:
    dim = getattr(model, "representation_dim", None)
    if dim is not None:
        return int(dim)
    # Probe with a minimal context; models are deterministic so this is safe.
    probe = step(model, TokenSequence((0,), model.vocab))
    return int(probe.representations.shape[1])


def _error(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def _token_list(value, vocab, label: str) -> TokenSequence:
    if not isinstance(value, list) or not all(isinstance(t, int) for t in value):
        raise InputError(f"{label} must be a list of integers")
    return TokenSequence(tuple(value), vocab)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        model: LanguageModel = self.server.model  # type: ignore[attr-defined]
        for line in self.rfile:
            if not line.strip():
                continue
            try:
                msg = json.loads(line)
            except json.JSONDecodeError:
                self._send(_error("protocol", "request is not valid JSON"))
                continue
            op = msg.get("op") if isinstance(msg, dict) else None
            try:
                if op == "hello":
                    reply = {
                        "vocab_size": model.vocab.size,
                        "eod": model.vocab.eod_token,
                        "dim": self.server.dim,  # type: ignore[attr-defined]
                    }
                elif op == "step":
                    context = _token_list(msg.get("tokens"), model.vocab, "tokens")
                    out = step(model, context)
                    reply = {
                        "probs": out.distribution.tolist(),
                        "reprs": out.representations.tolist(),
                    }
                elif op == "score":
                    prefix = _token_list(msg.get("prefix"), model.vocab, "prefix")
                    cont = _token_list(msg.get("continuation"), model.vocab, "continuation")
                    scored = score_sequence(model, prefix, cont)
                    reply = {
                        "logprobs": [
                            None if not np.isfinite(v) else float(v)
                            for v in scored.logprobs
                        ]
                    }
                else:
                    reply = _error("protocol", f"unknown op {op!r}")
            except InputError as err:
                reply = _error("input", str(err))
            except Exception as err:  # surface, do not kill the connection
                logger.exception("request failed")
                reply = _error("protocol", f"{type(err).__name__}: {err}")
            self._send(reply)

    def _send(self, payload: dict) -> None:
        self.wfile.write(json.dumps(payload, allow_nan=False).encode() + b"\n")
        self.wfile.flush()


class ModelServer(socketserver.ThreadingTCPServer):
    """TCP server exposing one model; one protocol session per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], model: LanguageModel):
        super().__init__(address, _Handler)
        self.model = model
        self.dim = _representation_dim(model)

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"


def serve(model: LanguageModel, host: str = "127.0.0.1", port: int = 7060) -> None:
    """Run a model server until interrupted. Port conflicts raise OSError."""
    with ModelServer((host, port), model) as server:
        logger.info("serving model on %s", server.endpoint)
        server.serve_forever()
