"""Exact paired sign test for pairwise system comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable

from ..errors import InputError

SIGNIFICANCE_LEVEL = Fraction(1, 20)


class Verdict(str, Enum):
    A_WINS = "a_wins"
    B_WINS = "b_wins"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class PairwiseComparison:
    """One judged prompt: which system's continuation was preferred."""

    prompt_id: Any
    system_a: str
    system_b: str
    verdict: Verdict


@dataclass(frozen=True)
class SignTestResult:
    wins_a: int
    wins_b: int
    neutrals: int
    p_value: float
    significant: bool

    @property
    def better(self) -> str | None:
        """"a" or "b" when significant, else None."""
        if not self.significant:
            return None
        return "a" if self.wins_a > self.wins_b else "b"


def exact_binomial_p(wins_a: int, wins_b: int) -> Fraction:
    """Two-sided exact binomial p-value at success probability 1/2.

    Neutral outcomes must already be excluded. Doubled smaller tail, capped
    at 1; for a fair coin this equals the min-likelihood two-sided test.
    """
    if wins_a < 0 or wins_b < 0:
        raise InputError("win counts must be non-negative")
    n = wins_a + wins_b
    if n == 0:
        raise InputError("sign test undefined: every comparison was neutral")
    m = min(wins_a, wins_b)
    tail = sum(math.comb(n, i) for i in range(m + 1))
    return min(Fraction(2 * tail, 2**n), Fraction(1))


def sign_test(comparisons: Iterable[PairwiseComparison | Verdict]) -> SignTestResult:
    """Run the exact sign test over judged comparisons.

    Accepts full PairwiseComparison records or bare verdicts. Significance
    is strict: p < 0.05, compared in exact rational arithmetic.
    """
    wins_a = wins_b = neutrals = 0
    for item in comparisons:
        verdict = item.verdict if isinstance(item, PairwiseComparison) else item
        if verdict is Verdict.A_WINS:
            wins_a += 1
        elif verdict is Verdict.B_WINS:
            wins_b += 1
        elif verdict is Verdict.NEUTRAL:
            neutrals += 1
        else:
            raise InputError(f"unknown verdict {verdict!r}")
    p = exact_binomial_p(wins_a, wins_b)
    return SignTestResult(
        wins_a=wins_a,
        wins_b=wins_b,
        neutrals=neutrals,
        p_value=float(p),
        significant=p < SIGNIFICANCE_LEVEL,
    )
