"""Coherence: average conditional log-likelihood of a continuation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..lm import LanguageModel, TokenSequence, score_sequence


@dataclass(frozen=True)
class CoherenceScore:
    """Mean per-token log-probability of a continuation given its prompt.

    ``value`` is finite exactly when ``degenerate`` is False; a continuation
    containing any zero-probability token scores -inf overall.
    """

    value: float
    token_count: int
    degenerate: bool


def coherence(
    scorer: LanguageModel, prompt: TokenSequence, continuation: TokenSequence
) -> CoherenceScore:
    scored = score_sequence(scorer, prompt, continuation)
    if scored.degenerate:
        value = float("-inf")
    else:
        value = float(np.sum(scored.logprobs) / len(scored.logprobs))
    return CoherenceScore(value=value, token_count=len(scored.logprobs), degenerate=scored.degenerate)


@dataclass(frozen=True)
class CorpusCoherence:
    """Unweighted mean over finite instances; degenerate ones counted aside."""

    mean: float | None
    degenerate: int
    scores: tuple[CoherenceScore, ...]


def corpus_coherence(scores: Iterable[CoherenceScore]) -> CorpusCoherence:
    all_scores = tuple(scores)
    finite = [s.value for s in all_scores if not s.degenerate]
    mean = sum(finite) / len(finite) if finite else None
    return CorpusCoherence(mean=mean, degenerate=len(all_scores) - len(finite), scores=all_scores)
