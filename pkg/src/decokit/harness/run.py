"""Benchmark and sweep execution.

Seeds: every generation gets its own seed derived from
sha256("{master_seed}:{system}:{prompt_index}"), so runs are reproducible
end to end, independent per instance, and insensitive to which other
systems share the run.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Mapping, Sequence

from ..decoding import ContrastiveDecoding, ContrastiveSearch, generate, spec_to_dict
from ..errors import DecokitError, InputError
from ..lm import LanguageModel, TokenSequence, Vocabulary, build_model
from ..metrics import (
    coherence,
    corpus_coherence,
    corpus_diversity,
    default_mixture_grid,
    extract_features,
    frontier_score,
)
from .config import MetricSettings, RunConfig, SweepSpec, SystemSpec
from .io import PromptRecord, load_prompts, load_references, record_to_row
from .report import json_safe, render_sweep_table, render_table

logger = logging.getLogger(__name__)


def derive_seed(master_seed: int, system: str, prompt_index: int) -> int:
    """Stable 64-bit per-generation seed."""
    digest = hashlib.sha256(f"{master_seed}:{system}:{prompt_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _diversity_block(texts: Sequence[Sequence[int]]) -> dict:
    corpus = corpus_diversity(texts)
    reps: dict[str, float | None] = {}
    for n in (2, 3, 4):
        vals = [r.rep[n] for r in corpus.reports if n in r.rep]
        reps[f"rep_{n}"] = sum(vals) / len(vals) if vals else None
    return {
        "mean": json_safe(corpus.mean),
        "mean_pct": json_safe(None if corpus.mean is None else 100.0 * corpus.mean),
        "excluded_short": corpus.excluded,
        **{k: json_safe(v) for k, v in reps.items()},
    }


def _coherence_block(
    scorer: LanguageModel, prompts: Sequence[TokenSequence], conts: Sequence[TokenSequence]
) -> dict:
    scores = [
        coherence(scorer, p, c) for p, c in zip(prompts, conts) if len(c) > 0
    ]
    skipped_empty = sum(1 for c in conts if len(c) == 0)
    corpus = corpus_coherence(scores)
    return {
        "mean": json_safe(corpus.mean),
        "degenerate": corpus.degenerate,
        "skipped_empty": skipped_empty,
        "instances": [
            {"value": json_safe(s.value), "tokens": s.token_count, "degenerate": s.degenerate}
            for s in scores
        ],
    }


def _frontier_block(
    generated: Sequence[TokenSequence],
    references: Sequence[TokenSequence],
    settings: MetricSettings,
    vocab: Vocabulary,
    scorer: LanguageModel | None,
) -> dict:
    gen = [t.truncate(settings.truncate) for t in generated]
    ref = [t.truncate(settings.truncate) for t in references]
    kwargs: dict[str, Any] = (
        {"vocab_size": vocab.size} if settings.feature == "bigram" else {"scorer": scorer}
    )
    fp = extract_features(settings.feature, gen, **kwargs)
    fq = extract_features(settings.feature, ref, **kwargs)
    score = frontier_score(
        fp,
        fq,
        settings.num_bins,
        scaling_constant=settings.scaling_constant,
        seed=settings.seed,
        mixture_grid=default_mixture_grid(settings.grid_points),
    )
    return {
        "value": score.value,
        "value_pct": score.value_pct,
        "num_bins": score.num_bins,
        "scaling_constant": score.scaling_constant,
        "grid_points": settings.grid_points,
        "truncate": settings.truncate,
        "feature": settings.feature,
    }


def metric_report(
    rows: Sequence[Mapping[str, Any]],
    references: Sequence[PromptRecord] | None,
    settings: MetricSettings,
    *,
    scorer: LanguageModel | None = None,
    vocab: Vocabulary | None = None,
) -> dict:
    """Diversity, coherence, and (given references) frontier for one system.

    Coherence needs a scorer model and is reported as null without one;
    diversity and bigram-feature frontiers only need the vocabulary.
    """
    if vocab is None:
        if scorer is None:
            raise InputError("metric_report needs a scorer model or an explicit vocabulary")
        vocab = scorer.vocab
    prompts = [TokenSequence(tuple(r["prompt"]), vocab) for r in rows]
    conts = [TokenSequence(tuple(r["continuation"]), vocab) for r in rows]
    block = {
        "diversity": _diversity_block([c.tokens for c in conts]),
        "coherence": (
            _coherence_block(scorer, prompts, conts) if scorer is not None else None
        ),
        "frontier": None,
    }
    if references:
        usable = [c for c in conts if len(c) > 0]
        block["frontier"] = _frontier_block(
            usable, [r.tokens for r in references], settings, vocab, scorer
        )
    return block


def _run_one(
    model: LanguageModel,
    amateur: LanguageModel | None,
    system: SystemSpec,
    prompt: PromptRecord,
    index: int,
    master_seed: int,
    max_length: int,
) -> dict:
    seed = derive_seed(master_seed, system.name, index)
    record = generate(
        model,
        prompt.tokens,
        system.spec,
        max_length=max_length,
        seed=seed,
        amateur=amateur,
    )
    return record_to_row(prompt.prompt_id, system.name, record)


def run_benchmark(config: RunConfig, *, jobs: int = 1) -> dict:
    """Generate with every system over the benchmark prompts and score them.

    Per-instance failures are recorded under "failures" and the run keeps
    going; the report contains everything needed to reproduce it.
    """
    if jobs < 1:
        raise InputError(f"jobs must be at least 1, got {jobs}")
    model = build_model(config.model)
    amateur = build_model(config.amateur) if config.amateur is not None else None
    scorer = build_model(config.scorer) if config.scorer is not None else model
    if scorer.vocab.size != model.vocab.size:
        raise InputError(
            f"scorer vocabulary ({scorer.vocab.size}) differs from "
            f"model vocabulary ({model.vocab.size})"
        )
    bench = config.benchmark
    prompts = load_prompts(bench.prompt_file, bench.prompt_length, model.vocab)
    if not prompts:
        raise InputError(f"no usable prompts in {bench.prompt_file}")
    references = (
        load_references(bench.reference_file, model.vocab)
        if bench.reference_file is not None
        else None
    )

    tasks = [
        (system, index, prompt)
        for system in config.systems
        for index, prompt in enumerate(prompts)
    ]

    def run_task(task):
        system, index, prompt = task
        try:
            return (system.name, index), _run_one(
                model, amateur, system, prompt, index, config.master_seed, bench.max_length
            ), None
        except DecokitError as err:
            logger.warning("generation failed: %s prompt %r: %s", system.name, prompt.prompt_id, err)
            return (system.name, index), None, {
                "system": system.name,
                "prompt_id": prompt.prompt_id,
                "prompt_index": index,
                "error": str(err),
            }

    if jobs == 1:
        outcomes = [run_task(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_task, tasks))

    by_system: dict[str, list[dict]] = {s.name: [] for s in config.systems}
    failures = []
    for _key, row, failure in outcomes:
        if failure is not None:
            failures.append(failure)
        else:
            by_system[row["system"]].append(row)

    systems_out = []
    for system in config.systems:
        rows = by_system[system.name]
        entry = {
            "system": system.name,
            "strategy": spec_to_dict(system.spec),
            "generations": rows,
            "metrics": (
                metric_report(rows, references, config.metrics, scorer=scorer)
                if rows
                else None
            ),
        }
        systems_out.append(entry)

    return {
        "benchmark": {
            "name": bench.name,
            "prompt_file": bench.prompt_file,
            "prompt_length": bench.prompt_length,
            "max_length": bench.max_length,
            "reference_file": bench.reference_file,
            "prompt_count": len(prompts),
        },
        "master_seed": config.master_seed,
        "metric_settings": {
            "num_bins": config.metrics.num_bins,
            "scaling_constant": config.metrics.scaling_constant,
            "grid_points": config.metrics.grid_points,
            "feature": config.metrics.feature,
            "truncate": config.metrics.truncate,
            "seed": config.metrics.seed,
        },
        "systems": systems_out,
        "failures": failures,
    }


def render_report_table(report: dict) -> str:
    return render_table(report)


def sweep_system_name(k: int) -> str:
    return f"cs-k{k}"


def run_sweep(sweep: SweepSpec, config: RunConfig, *, jobs: int = 1) -> dict:
    """Contrastive-search k sweep plus the config's systems as baselines.

    Returns a plot-ready dataset: one row per swept k carrying coherence,
    diversity, and frontier, then one row per baseline system.
    """
    model = build_model(config.model)
    if sweep.k_max > model.vocab.size:
        raise InputError(
            f"sweep k_max {sweep.k_max} exceeds vocabulary size {model.vocab.size}"
        )
    sweep_systems = tuple(
        SystemSpec(sweep_system_name(k), ContrastiveSearch(k=k, alpha=sweep.alpha))
        for k in range(sweep.k_min, sweep.k_max + 1)
    )
    taken = {s.name for s in sweep_systems}
    clashes = [s.name for s in config.systems if s.name in taken]
    if clashes:
        raise InputError(f"baseline system names clash with sweep rows: {clashes}")
    combined = RunConfig(
        benchmark=config.benchmark,
        systems=sweep_systems + config.systems,
        model=config.model,
        amateur=config.amateur,
        scorer=config.scorer,
        master_seed=config.master_seed,
        metrics=config.metrics,
    )
    report = run_benchmark(combined, jobs=jobs)

    k_of = {sweep_system_name(k): k for k in range(sweep.k_min, sweep.k_max + 1)}
    rows = []
    for entry in report["systems"]:
        name = entry["system"]
        metrics = entry["metrics"] or {}
        diversity = metrics.get("diversity") or {}
        coherence_block = metrics.get("coherence") or {}
        frontier = metrics.get("frontier") or {}
        is_sweep = name in k_of
        strategy = entry["strategy"]
        rows.append(
            {
                "system": name,
                "k": k_of.get(name),
                "alpha": sweep.alpha if is_sweep else strategy.get("alpha"),
                "strategy": strategy,
                "coherence": coherence_block.get("mean"),
                "diversity": diversity.get("mean"),
                "diversity_pct": diversity.get("mean_pct"),
                "frontier": frontier.get("value"),
                "frontier_pct": frontier.get("value_pct"),
                "baseline": not is_sweep,
            }
        )
    return {
        "sweep": {"k_min": sweep.k_min, "k_max": sweep.k_max, "alpha": sweep.alpha},
        "benchmark": report["benchmark"],
        "master_seed": report["master_seed"],
        "metric_settings": report["metric_settings"],
        "rows": rows,
        "failures": report["failures"],
    }


def render_sweep(dataset: dict) -> str:
    return render_sweep_table(dataset)
