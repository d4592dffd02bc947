"""Repetition and diversity metrics over token sequences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import InputError
from ..lm import TokenSequence

REP_NS = (2, 3, 4)


def _tokens(text) -> tuple[int, ...]:
    if isinstance(text, TokenSequence):
        return text.tokens
    return tuple(int(t) for t in text)


def rep_n(text, n: int) -> float | None:
    """Duplicated n-gram percentage: 100 * (1 - unique / total).

    Returns None when the text is shorter than n (no n-grams exist).
    """
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    tokens = _tokens(text)
    total = len(tokens) - n + 1
    if total < 1:
        return None
    unique = len({tokens[i : i + n] for i in range(total)})
    return 100.0 * (1.0 - unique / total)


@dataclass(frozen=True)
class DiversityReport:
    """Repetition rates for n = 2, 3, 4 and their diversity product.

    ``rep`` holds only the orders the text was long enough for; ``diversity``
    is the product of (1 - rep_n / 100) over those orders, and ``complete``
    says whether all three were available.
    """

    rep: dict[int, float]
    diversity: float
    complete: bool

    @property
    def diversity_pct(self) -> float:
        return 100.0 * self.diversity


def diversity(text) -> DiversityReport:
    values = {n: rep_n(text, n) for n in REP_NS}
    present = {n: v for n, v in values.items() if v is not None}
    product = 1.0
    for n in sorted(present):
        product *= 1.0 - present[n] / 100.0
    return DiversityReport(rep=present, diversity=product, complete=len(present) == len(REP_NS))


@dataclass(frozen=True)
class CorpusDiversity:
    """Unweighted mean diversity over instances long enough to score."""

    mean: float | None
    excluded: int
    reports: tuple[DiversityReport, ...]

    @property
    def mean_pct(self) -> float | None:
        return None if self.mean is None else 100.0 * self.mean


def corpus_diversity(texts: Iterable[Sequence[int] | TokenSequence]) -> CorpusDiversity:
    """Average instance diversity; short texts are excluded, not imputed."""
    reports = tuple(diversity(t) for t in texts)
    usable = [r.diversity for r in reports if r.complete]
    mean = sum(usable) / len(usable) if usable else None
    return CorpusDiversity(mean=mean, excluded=len(reports) - len(usable), reports=reports)
