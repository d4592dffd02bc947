"""Feature extractors that turn token sequences into frontier-ready vectors."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..errors import InputError
from ..lm import LanguageModel, TokenSequence, step


def bigram_count_features(texts: Iterable[Sequence[int]], vocab_size: int) -> list[np.ndarray]:
    """Normalized bag-of-bigram frequency vectors, dimension vocab_size**2.

    Texts with fewer than two tokens map to the zero vector.
    """
    if vocab_size < 2:
        raise InputError(f"vocab_size must be at least 2, got {vocab_size}")
    out = []
    for text in texts:
        tokens = text.tokens if isinstance(text, TokenSequence) else tuple(int(t) for t in text)
        vec = np.zeros(vocab_size * vocab_size, dtype=np.float64)
        for a, b in zip(tokens, tokens[1:]):
            if not (0 <= a < vocab_size and 0 <= b < vocab_size):
                raise InputError(f"token pair ({a}, {b}) outside vocabulary of size {vocab_size}")
            vec[a * vocab_size + b] += 1.0
        total = vec.sum()
        if total > 0.0:
            vec /= total
        out.append(vec)
    return out


def mean_representation_features(
    texts: Iterable[TokenSequence], scorer: LanguageModel
) -> list[np.ndarray]:
    """Mean context representation of each text under the scorer model."""
    out = []
    for text in texts:
        if len(text) == 0:
            raise InputError("cannot embed an empty sequence")
        reprs = step(scorer, text).representations
        out.append(reprs.mean(axis=0))
    return out


FEATURE_NAMES = ("bigram", "mean_repr")


def extract_features(
    name: str,
    texts,
    *,
    vocab_size: int | None = None,
    scorer: LanguageModel | None = None,
) -> list[np.ndarray]:
    """Dispatch by extractor name; raises InputError for unknown names."""
    if name == "bigram":
        if vocab_size is None:
            raise InputError("bigram features need vocab_size")
        return bigram_count_features(texts, vocab_size)
    if name == "mean_repr":
        if scorer is None:
            raise InputError("mean_repr features need a scorer model")
        return mean_representation_features(texts, scorer)
    raise InputError(f"unknown feature extractor {name!r}; expected one of {FEATURE_NAMES}")
