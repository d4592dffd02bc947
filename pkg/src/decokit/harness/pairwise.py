"""Blind pairwise-comparison worksheets and verdict ingestion.

Export takes two generation files for the same prompt set and produces a
worksheet whose rows show the prompt and two continuations in seeded random
order, plus a separate key file mapping each row back to its systems. The
worksheet never mentions system names, so annotators stay blind. Ingestion
joins verdicts against the key and runs the exact sign test.
"""

from __future__ import annotations

from typing import Any, Mapping, Sequence

import numpy as np

from ..errors import InputError
from ..metrics import PairwiseComparison, SignTestResult, Verdict, sign_test


def _index_rows(rows: Sequence[Mapping[str, Any]], label: str) -> tuple[str, dict]:
    if not rows:
        raise InputError(f"{label}: no generation rows")
    systems = {str(r["system"]) for r in rows}
    if len(systems) != 1:
        raise InputError(f"{label}: expected one system, found {sorted(systems)}")
    by_id: dict[Any, Mapping[str, Any]] = {}
    for r in rows:
        pid = r["prompt_id"]
        if pid in by_id:
            raise InputError(f"{label}: duplicate prompt id {pid!r}")
        by_id[pid] = r
    return systems.pop(), by_id


def pairwise_export(
    rows_a: Sequence[Mapping[str, Any]],
    rows_b: Sequence[Mapping[str, Any]],
    order_seed: int = 0,
) -> tuple[list[dict], list[dict]]:
    """Build (worksheet, key) for two aligned generation files.

    The two sides must cover exactly the same prompt ids; anything missing
    on either side is an input error naming the offending ids.
    """
    system_a, by_id_a = _index_rows(rows_a, "side a")
    system_b, by_id_b = _index_rows(rows_b, "side b")
    if system_a == system_b:
        raise InputError(f"both sides are system {system_a!r}; nothing to compare")
    only_a = sorted((set(by_id_a) - set(by_id_b)), key=repr)
    only_b = sorted((set(by_id_b) - set(by_id_a)), key=repr)
    if only_a or only_b:
        raise InputError(
            "prompt ids are misaligned: "
            f"only in side a: {only_a}; only in side b: {only_b}"
        )
    rng = np.random.default_rng(order_seed)
    worksheet = []
    key = []
    for pid in by_id_a:  # insertion order = file order of side a
        row_a = by_id_a[pid]
        row_b = by_id_b[pid]
        if row_a["prompt"] != row_b["prompt"]:
            raise InputError(f"prompt {pid!r}: the two sides saw different prompt tokens")
        a_first = bool(rng.random() < 0.5)
        first, second = (row_a, row_b) if a_first else (row_b, row_a)
        worksheet.append(
            {
                "prompt_id": pid,
                "prompt": list(row_a["prompt"]),
                "first": list(first["continuation"]),
                "second": list(second["continuation"]),
            }
        )
        key.append(
            {
                "prompt_id": pid,
                "system_a": system_a,
                "system_b": system_b,
                "first": "a" if a_first else "b",
            }
        )
    return worksheet, key


_VERDICT_MAP = {"first", "second", "neutral"}


def pairwise_ingest(
    verdict_rows: Sequence[Mapping[str, Any]],
    key_rows: Sequence[Mapping[str, Any]],
) -> tuple[list[PairwiseComparison], SignTestResult]:
    """De-blind verdicts against the key and run the sign test.

    Verdict rows look like {"prompt_id": ..., "verdict": "first" | "second"
    | "neutral"}. Every verdict must match a key row; judging a prompt twice
    or skipping one is an input error, since a partial tally would silently
    bias the test.
    """
    key_by_id: dict[Any, Mapping[str, Any]] = {}
    for row in key_rows:
        if "prompt_id" not in row or row.get("first") not in ("a", "b"):
            raise InputError(f"malformed key row: {row!r}")
        pid = row["prompt_id"]
        if pid in key_by_id:
            raise InputError(f"duplicate key row for prompt {pid!r}")
        key_by_id[pid] = row

    comparisons = []
    seen: set = set()
    for row in verdict_rows:
        if "prompt_id" not in row or "verdict" not in row:
            raise InputError(f"malformed verdict row: {row!r}")
        pid = row["prompt_id"]
        verdict = row["verdict"]
        if pid not in key_by_id:
            raise InputError(f"verdict for unknown prompt {pid!r}")
        if pid in seen:
            raise InputError(f"duplicate verdict for prompt {pid!r}")
        if verdict not in _VERDICT_MAP:
            raise InputError(
                f"prompt {pid!r}: verdict must be first, second, or neutral, got {verdict!r}"
            )
        seen.add(pid)
        key = key_by_id[pid]
        if verdict == "neutral":
            outcome = Verdict.NEUTRAL
        elif (verdict == "first") == (key["first"] == "a"):
            outcome = Verdict.A_WINS
        else:
            outcome = Verdict.B_WINS
        comparisons.append(
            PairwiseComparison(
                prompt_id=pid,
                system_a=str(key["system_a"]),
                system_b=str(key["system_b"]),
                verdict=outcome,
            )
        )
    missing = sorted((set(key_by_id) - seen), key=repr)
    if missing:
        raise InputError(f"missing verdicts for prompts: {missing}")
    return comparisons, sign_test(comparisons)
