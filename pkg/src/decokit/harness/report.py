"""Deterministic report serialization and table rendering."""

from __future__ import annotations

import json
import math
from typing import Any


def json_safe(value: float | None) -> float | None:
    """Map non-finite floats to None; reports must stay strict JSON."""
    if value is None:
        return None
    v = float(value)
    return v if math.isfinite(v) else None


def canonical_json(obj: Any) -> str:
    """Stable serialization: sorted keys, fixed separators, trailing newline.

    Reports carry no timestamps, so two runs over the same inputs produce
    byte-identical output.
    """
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(value: float | None, digits: int = 2) -> str:
    if value is None:
        return "n/a"
    return f"{value:.{digits}f}"


def render_table(report: dict) -> str:
    """Three-column results table: diversity %, frontier %, coherence."""
    headers = ("method", "div.(%)", "frontier(%)", "coh.")
    rows = [headers]
    for entry in report["systems"]:
        m = entry["metrics"] or {}
        diversity = m.get("diversity") or {}
        frontier = m.get("frontier") or {}
        coherence = m.get("coherence") or {}
        rows.append(
            (
                str(entry["system"]),
                _fmt(diversity.get("mean_pct")),
                _fmt(frontier.get("value_pct")),
                _fmt(coherence.get("mean")),
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(headers))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(len(headers))))
    return "\n".join(lines) + "\n"


def render_sweep_table(dataset: dict) -> str:
    """Plot-ready sweep table: one row per k plus the baselines."""
    headers = ("system", "k", "alpha", "div.(%)", "frontier(%)", "coh.")
    rows = [headers]
    for entry in dataset["rows"]:
        rows.append(
            (
                str(entry["system"]),
                "-" if entry["k"] is None else str(entry["k"]),
                "-" if entry["alpha"] is None else f"{entry['alpha']:g}",
                _fmt(entry["diversity_pct"]),
                _fmt(entry["frontier_pct"]),
                _fmt(entry["coherence"]),
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(headers))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(len(headers))))
    return "\n".join(lines) + "\n"
