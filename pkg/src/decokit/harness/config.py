"""Run configuration documents for benchmarks and sweeps.

A run config is plain JSON:

    {"benchmark": {"name": "wikinews", "prompt_file": "prompts.jsonl",
                   "prompt_length": 32, "max_length": 256,
                   "reference_file": "refs.jsonl"},
     "systems": [{"name": "cs", "strategy": {"name": "contrastive-search",
                                             "k": 5, "alpha": 0.6}}, ...],
     "model": {...model spec...},
     "amateur": {...},            # only needed by contrastive decoding
     "scorer": {...},             # defaults to the generator model
     "master_seed": 0,
     "metrics": {"num_bins": 8, "scaling_constant": 5.0, "grid_points": 25,
                 "feature": "bigram", "truncate": 128, "seed": 0}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ..decoding import ContrastiveDecoding, DecodeSpec, spec_from_dict
from ..errors import InputError


@dataclass(frozen=True)
class BenchmarkSpec:
    """A named prompt set and its generation budget."""

    name: str
    prompt_file: str
    prompt_length: int = 32
    max_length: int = 256
    reference_file: str | None = None

    def __post_init__(self) -> None:
        if self.prompt_length < 1:
            raise InputError(f"prompt_length must be at least 1, got {self.prompt_length}")
        if self.max_length < 1:
            raise InputError(f"max_length must be at least 1, got {self.max_length}")


@dataclass(frozen=True)
class MetricSettings:
    num_bins: int = 8
    scaling_constant: float = 5.0
    grid_points: int = 25
    feature: str = "bigram"
    truncate: int = 128
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_bins < 1:
            raise InputError(f"num_bins must be at least 1, got {self.num_bins}")
        if self.truncate < 1:
            raise InputError(f"truncate must be at least 1, got {self.truncate}")
        if self.grid_points < 1:
            raise InputError(f"grid_points must be at least 1, got {self.grid_points}")


@dataclass(frozen=True)
class SystemSpec:
    """A display name bound to one decoding strategy."""

    name: str
    spec: DecodeSpec


@dataclass(frozen=True)
class RunConfig:
    benchmark: BenchmarkSpec
    systems: tuple[SystemSpec, ...]
    model: Mapping[str, Any]
    amateur: Mapping[str, Any] | None = None
    scorer: Mapping[str, Any] | None = None
    master_seed: int = 0
    metrics: MetricSettings = field(default_factory=MetricSettings)

    def __post_init__(self) -> None:
        if not self.systems:
            raise InputError("run config needs at least one system")
        names = [s.name for s in self.systems]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise InputError(f"system names must be unique; duplicated: {dupes}")
        needs_amateur = [
            s.name for s in self.systems if isinstance(s.spec, ContrastiveDecoding)
        ]
        if needs_amateur and self.amateur is None:
            raise InputError(
                f"systems {needs_amateur} use contrastive decoding but no amateur model is configured"
            )


@dataclass(frozen=True)
class SweepSpec:
    """Contrastive-search candidate-size sweep at fixed alpha."""

    k_min: int = 2
    k_max: int = 10
    alpha: float = 0.6

    def __post_init__(self) -> None:
        if self.k_min < 1 or self.k_max < self.k_min:
            raise InputError(
                f"sweep needs 1 <= k_min <= k_max, got [{self.k_min}, {self.k_max}]"
            )
        if not 0.0 <= self.alpha <= 1.0:
            raise InputError(f"sweep alpha must be in [0, 1], got {self.alpha}")


def _resolve(path: str, base_dir: Path | None) -> str:
    p = Path(path)
    if base_dir is not None and not p.is_absolute():
        return str(base_dir / p)
    return str(p)


def run_config_from_dict(data: Mapping[str, Any], base_dir: Path | None = None) -> RunConfig:
    """Parse a run config document; relative files resolve against base_dir."""
    if not isinstance(data, Mapping):
        raise InputError("run config must be an object")
    for key in ("benchmark", "systems", "model"):
        if key not in data:
            raise InputError(f"run config is missing {key!r}")
    b = data["benchmark"]
    if not isinstance(b, Mapping) or "name" not in b or "prompt_file" not in b:
        raise InputError("benchmark must be an object with name and prompt_file")
    benchmark = BenchmarkSpec(
        name=str(b["name"]),
        prompt_file=_resolve(str(b["prompt_file"]), base_dir),
        prompt_length=int(b.get("prompt_length", 32)),
        max_length=int(b.get("max_length", 256)),
        reference_file=(
            _resolve(str(b["reference_file"]), base_dir)
            if b.get("reference_file") is not None
            else None
        ),
    )
    raw_systems = data["systems"]
    if not isinstance(raw_systems, list) or not raw_systems:
        raise InputError("systems must be a non-empty list")
    systems = []
    for i, s in enumerate(raw_systems):
        if not isinstance(s, Mapping) or "name" not in s or "strategy" not in s:
            raise InputError(f"system {i} must be an object with name and strategy")
        systems.append(SystemSpec(str(s["name"]), spec_from_dict(s["strategy"])))
    m = data.get("metrics", {})
    if not isinstance(m, Mapping):
        raise InputError("metrics settings must be an object")
    metrics = MetricSettings(
        num_bins=int(m.get("num_bins", 8)),
        scaling_constant=float(m.get("scaling_constant", 5.0)),
        grid_points=int(m.get("grid_points", 25)),
        feature=str(m.get("feature", "bigram")),
        truncate=int(m.get("truncate", 128)),
        seed=int(m.get("seed", 0)),
    )
    return RunConfig(
        benchmark=benchmark,
        systems=tuple(systems),
        model=data["model"],
        amateur=data.get("amateur"),
        scorer=data.get("scorer"),
        master_seed=int(data.get("master_seed", 0)),
        metrics=metrics,
    )


def load_run_config(path: str | Path) -> RunConfig:
    """Read a config file; relative data files resolve against its directory."""
    p = Path(path)
    if not p.exists():
        raise InputError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise InputError(f"{p}: invalid JSON: {err}") from err
    return run_config_from_dict(data, base_dir=p.parent)
