"""JSON Lines readers and writers for prompts, generations, and worksheets.

Prompt and reference files share one row shape:

    {"id": "wikinews-17", "tokens": [12, 4, 9, ...]}

Generation files add the decoding provenance:

    {"prompt_id": ..., "system": ..., "prompt": [...], "continuation": [...],
     "strategy": {"name": ...}, "seed": ..., "stop_reason": ...,
     "vocab_size": ..., "eod": ...}
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from ..decoding import GenerationRecord, spec_to_dict
from ..errors import InputError
from ..lm import TokenSequence, Vocabulary

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PromptRecord:
    """One prompt row: a stable id plus its (already truncated) tokens."""

    prompt_id: Any
    tokens: TokenSequence


def read_jsonl(path: str | Path) -> list[tuple[int, Any]]:
    """All rows of a JSON Lines file as (line_number, parsed) pairs."""
    p = Path(path)
    if not p.exists():
        raise InputError(f"file not found: {p}")
    rows = []
    with p.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rows.append((lineno, json.loads(line)))
            except json.JSONDecodeError as err:
                raise InputError(f"{p}:{lineno}: invalid JSON: {err.msg}") from err
    return rows


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    p = Path(path)
    with p.open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, allow_nan=False) + "\n")


def jsonl_text(rows: Iterable[dict]) -> str:
    return "".join(json.dumps(row, sort_keys=True, allow_nan=False) + "\n" for row in rows)


def parse_prompt_row(lineno: int, row: Any, path: Path) -> tuple[Any, list[int]]:
    """Shape-check one prompt/reference row; returns (id, tokens)."""
    if (
        not isinstance(row, dict)
        or "id" not in row
        or not isinstance(row.get("tokens"), list)
        or not all(isinstance(t, int) and not isinstance(t, bool) for t in row["tokens"])
    ):
        raise InputError(
            f"{path}:{lineno}: expected an object with 'id' and integer 'tokens'"
        )
    return row["id"], row["tokens"]


def load_prompts(
    path: str | Path, prompt_length: int, vocab: Vocabulary
) -> list[PromptRecord]:
    """Load prompts, truncating each row to exactly ``prompt_length`` tokens.

    Rows that are too short or contain out-of-range token ids are rejected
    and logged, not fatal; malformed JSON or row shape aborts with the line
    number. Duplicate ids abort too: downstream pairing needs them unique.
    """
    if prompt_length < 1:
        raise InputError(f"prompt_length must be at least 1, got {prompt_length}")
    p = Path(path)
    records: list[PromptRecord] = []
    seen: set = set()
    for lineno, row in read_jsonl(p):
        prompt_id, tokens = parse_prompt_row(lineno, row, p)
        if prompt_id in seen:
            raise InputError(f"{p}:{lineno}: duplicate prompt id {prompt_id!r}")
        seen.add(prompt_id)
        if len(tokens) < prompt_length:
            logger.warning(
                "%s:%d: rejected prompt %r: %d tokens, need %d",
                p, lineno, prompt_id, len(tokens), prompt_length,
            )
            continue
        try:
            seq = TokenSequence(tuple(tokens[:prompt_length]), vocab)
        except InputError as err:
            logger.warning("%s:%d: rejected prompt %r: %s", p, lineno, prompt_id, err)
            continue
        records.append(PromptRecord(prompt_id, seq))
    if not records:
        logger.warning("%s: no usable prompts", p)
    return records


def load_references(path: str | Path, vocab: Vocabulary) -> list[PromptRecord]:
    """Load reference continuations; same row shape, no length requirement."""
    p = Path(path)
    records = []
    seen: set = set()
    for lineno, row in read_jsonl(p):
        ref_id, tokens = parse_prompt_row(lineno, row, p)
        if ref_id in seen:
            raise InputError(f"{p}:{lineno}: duplicate reference id {ref_id!r}")
        seen.add(ref_id)
        try:
            seq = TokenSequence(tuple(tokens), vocab)
        except InputError as err:
            raise InputError(f"{p}:{lineno}: {err}") from err
        records.append(PromptRecord(ref_id, seq))
    return records


def record_to_row(prompt_id: Any, system: str, record: GenerationRecord) -> dict:
    """Flatten a finished generation into its JSONL row."""
    vocab = record.prompt.vocab
    return {
        "prompt_id": prompt_id,
        "system": system,
        "prompt": list(record.prompt.tokens),
        "continuation": list(record.continuation.tokens),
        "strategy": spec_to_dict(record.spec),
        "seed": record.seed,
        "stop_reason": record.stop_reason.value,
        "vocab_size": vocab.size,
        "eod": vocab.eod_token,
    }


def load_generation_rows(path: str | Path) -> list[dict]:
    """Read and shape-check generation rows written by record_to_row."""
    p = Path(path)
    rows = []
    for lineno, row in read_jsonl(p):
        if not isinstance(row, dict):
            raise InputError(f"{p}:{lineno}: expected an object")
        for key in ("prompt_id", "system", "prompt", "continuation", "vocab_size"):
            if key not in row:
                raise InputError(f"{p}:{lineno}: generation row is missing {key!r}")
        for key in ("prompt", "continuation"):
            if not isinstance(row[key], list) or not all(
                isinstance(t, int) and not isinstance(t, bool) for t in row[key]
            ):
                raise InputError(f"{p}:{lineno}: {key!r} must be a list of integers")
        rows.append(row)
    return rows
