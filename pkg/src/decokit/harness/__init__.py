"""Benchmark harness: configs, prompt IO, runs, sweeps, pairwise evaluation."""

from ..lm.specs import BACKEND_ENV_VAR
from .config import (
    BenchmarkSpec,
    MetricSettings,
    RunConfig,
    SweepSpec,
    SystemSpec,
    load_run_config,
    run_config_from_dict,
)
from .io import (
    PromptRecord,
    jsonl_text,
    load_generation_rows,
    load_prompts,
    load_references,
    parse_prompt_row,
    read_jsonl,
    record_to_row,
    write_jsonl,
)
from .pairwise import pairwise_export, pairwise_ingest
from .report import canonical_json, json_safe, render_sweep_table, render_table
from .run import (
    derive_seed,
    metric_report,
    run_benchmark,
    run_sweep,
    sweep_system_name,
)

__all__ = [
    "BACKEND_ENV_VAR",
    "BenchmarkSpec",
    "MetricSettings",
    "PromptRecord",
    "RunConfig",
    "SweepSpec",
    "SystemSpec",
    "canonical_json",
    "derive_seed",
    "json_safe",
    "jsonl_text",
    "load_generation_rows",
    "load_prompts",
    "load_references",
    "load_run_config",
    "metric_report",
    "pairwise_export",
    "pairwise_ingest",
    "parse_prompt_row",
    "read_jsonl",
    "record_to_row",
    "render_sweep_table",
    "render_table",
    "run_benchmark",
    "run_config_from_dict",
    "run_sweep",
    "sweep_system_name",
    "write_jsonl",
]
