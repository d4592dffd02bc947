"""Build models from JSON spec documents.

Three kinds are supported:

    {"kind": "table", "vocab_size": 4, "eod": 3, "order": 1,
     "rows": [{"context": [], "probs": [...]}, {"context": [0], "probs": [...]}],
     "vectors": [[...], ...]}                      # (V, d) or (window, V, d)

    {"kind": "ngram", "vocab_size": 8, "eod": 7, "order": 2,
     "smoothing": 0.5, "corpus": [...]}

    {"kind": "remote", "endpoint": "127.0.0.1:7060", "timeout": 10.0}

Used by run configs, the HTTP service, and the serve-toy CLI command.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping

from ..errors import InputError
from .remote import RemoteModel
from .toy import NgramModel, TableModel
from .types import LanguageModel, Vocabulary

# Remote specs may omit "endpoint" and inherit it from the environment.
BACKEND_ENV_VAR = "DECOKIT_BACKEND"


def _require(spec: Mapping[str, Any], key: str, kind: str):
    if key not in spec:
        raise InputError(f"{kind} model spec is missing {key!r}")
    return spec[key]


def _vocabulary(spec: Mapping[str, Any], kind: str) -> Vocabulary:
    size = _require(spec, "vocab_size", kind)
    if not isinstance(size, int):
        raise InputError(f"vocab_size must be an integer, got {size!r}")
    eod = spec.get("eod")
    if eod is not None and not isinstance(eod, int):
        raise InputError(f"eod must be an integer or null, got {eod!r}")
    return Vocabulary(size, eod)


def build_model(spec: Mapping[str, Any]) -> LanguageModel:
    """Instantiate the model a spec document describes."""
    if not isinstance(spec, Mapping):
        raise InputError(f"model spec must be an object, got {type(spec).__name__}")
    kind = spec.get("kind")
    if kind == "table":
        vocab = _vocabulary(spec, "table")
        raw_rows = _require(spec, "rows", "table")
        if not isinstance(raw_rows, list):
            raise InputError("table rows must be a list")
        rows = {}
        for i, row in enumerate(raw_rows):
            if not isinstance(row, Mapping) or "context" not in row or "probs" not in row:
                raise InputError(f"table row {i} must have context and probs")
            rows[tuple(row["context"])] = row["probs"]
        return TableModel(
            vocab,
            rows,
            _require(spec, "vectors", "table"),
            order=int(spec.get("order", 1)),
        )
    if kind == "ngram":
        vocab = _vocabulary(spec, "ngram")
        return NgramModel(
            vocab,
            _require(spec, "corpus", "ngram"),
            order=int(spec.get("order", 2)),
            smoothing=float(spec.get("smoothing", 0.5)),
        )
    if kind == "remote":
        endpoint = spec.get("endpoint") or os.environ.get(BACKEND_ENV_VAR)
        if not endpoint:
            raise InputError(
                f"remote model spec has no endpoint and {BACKEND_ENV_VAR} is not set"
            )
        return RemoteModel(str(endpoint), timeout=float(spec.get("timeout", 10.0)))
    raise InputError(f"unknown model kind {kind!r}; expected table, ngram, or remote")


def load_model_file(path: str | Path) -> LanguageModel:
    """Read a spec document from disk and build it."""
    p = Path(path)
    if not p.exists():
        raise InputError(f"model spec file not found: {p}")
    try:
        spec = json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise InputError(f"{p}: invalid JSON: {err}") from err
    return build_model(spec)
