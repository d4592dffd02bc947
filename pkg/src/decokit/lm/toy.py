"""Deterministic in-repo models for tests and desk-scale benchmarks."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..errors import InputError
from .types import StepOutput, TokenSequence, Vocabulary

# Table rows are user-authored, so they get a tighter sum check than model
# outputs in general.
ROW_TOLERANCE = 1e-9


def _check_row(row: np.ndarray, size: int, label: str) -> np.ndarray:
    arr = np.asarray(row, dtype=np.float64)
    if arr.shape != (size,):
        raise InputError(f"{label}: expected {size} probabilities, got shape {arr.shape}")
    if not np.isfinite(arr).all() or np.any(arr < 0.0):
        raise InputError(f"{label}: probabilities must be finite and non-negative")
    total = float(arr.sum())
    if abs(total - 1.0) > ROW_TOLERANCE:
        raise InputError(f"{label}: row sums to {total!r}, expected 1")
    return arr


class TableModel:
    """Next-token model backed by explicit distribution rows.

    Rows are keyed by context suffixes of up to ``order`` tokens; lookup
    tries the longest suffix first and falls back to shorter ones, ending at
    the unconditional row keyed ``()``. A context that matches no row is an
    input error. Representations come from a fixed per-token vector table
    that may cycle with context position (``vectors`` of shape (V, d) or
    (window, V, d)).
    """

    def __init__(
        self,
        vocab: Vocabulary,
        rows: Mapping[Sequence[int], Sequence[float]],
        vectors,
        *,
        order: int = 1,
    ):
        if order < 0:
            raise InputError(f"order must be non-negative, got {order}")
        self._vocab = vocab
        self._order = order
        self._rows: dict[tuple[int, ...], np.ndarray] = {}
        for key, row in rows.items():
            ctx = tuple(int(t) for t in key)
            if len(ctx) > order:
                raise InputError(f"row context {ctx} longer than order {order}")
            for t in ctx:
                if not 0 <= t < vocab.size:
                    raise InputError(f"row context {ctx} has token outside vocabulary")
            self._rows[ctx] = _check_row(row, vocab.size, f"row {ctx}")
        vecs = np.asarray(vectors, dtype=np.float64)
        if vecs.ndim == 2:
            vecs = vecs[np.newaxis, :, :]
        if vecs.ndim != 3 or vecs.shape[1] != vocab.size or vecs.shape[2] < 1:
            raise InputError(
                "vectors must have shape (vocab, dim) or (window, vocab, dim)"
            )
        self._vectors = vecs

    @property
    def vocab(self) -> Vocabulary:
        return self._vocab

    @property
    def representation_dim(self) -> int:
        return int(self._vectors.shape[2])

    def _lookup(self, tokens: tuple[int, ...]) -> np.ndarray:
        for length in range(min(self._order, len(tokens)), -1, -1):
            row = self._rows.get(tokens[len(tokens) - length :])
            if row is not None:
                return row
        raise InputError(f"no table row matches context suffix of {tokens[-self._order :]}")

    def step(self, context: TokenSequence) -> StepOutput:
        tokens = np.asarray(context.tokens, dtype=np.intp)
        positions = np.arange(len(tokens)) % self._vectors.shape[0]
        reprs = self._vectors[positions, tokens]
        return StepOutput(self._lookup(context.tokens), reprs)


class NgramModel:
    """Additively smoothed n-gram model fitted on a token corpus.

    Conditional rows are smoothed counts over the last ``order - 1`` context
    tokens; smoothing ``smoothing > 0`` keeps every probability strictly
    positive, including for unseen contexts. Token representations are the
    smoothed bigram continuation rows, so every token gets a corpus-dependent
    embedding of width ``vocab.size`` with no external model.
    """

    def __init__(
        self,
        vocab: Vocabulary,
        corpus: Sequence[int],
        *,
        order: int = 2,
        smoothing: float = 0.5,
    ):
        if order < 1:
            raise InputError(f"order must be at least 1, got {order}")
        if not smoothing > 0.0:
            raise InputError(f"smoothing must be positive, got {smoothing}")
        tokens = [int(t) for t in corpus]
        for t in tokens:
            if not 0 <= t < vocab.size:
                raise InputError(f"corpus token {t} outside vocabulary of size {vocab.size}")
        self._vocab = vocab
        self._order = order
        self._smoothing = float(smoothing)
        self._counts: dict[tuple[int, ...], np.ndarray] = {}
        for i in range(len(tokens) - order + 1):
            ctx = tuple(tokens[i : i + order - 1])
            nxt = tokens[i + order - 1]
            row = self._counts.get(ctx)
            if row is None:
                row = np.zeros(vocab.size, dtype=np.float64)
                self._counts[ctx] = row
            row[nxt] += 1.0
        bigram = np.zeros((vocab.size, vocab.size), dtype=np.float64)
        for a, b in zip(tokens, tokens[1:]):
            bigram[a, b] += 1.0
        lam = self._smoothing
        self._embeddings = (bigram + lam) / (
            bigram.sum(axis=1, keepdims=True) + lam * vocab.size
        )

    @property
    def vocab(self) -> Vocabulary:
        return self._vocab

    @property
    def representation_dim(self) -> int:
        return self._vocab.size

    def distribution(self, tokens: Sequence[int]) -> np.ndarray:
        start = max(0, len(tokens) - (self._order - 1))
        key = tuple(int(t) for t in tokens[start:]) if self._order > 1 else ()
        counts = self._counts.get(key)
        lam = self._smoothing
        size = self._vocab.size
        if counts is None:
            # Unseen context: all counts zero, smoothing alone -> uniform.
            return np.full(size, 1.0 / size, dtype=np.float64)
        return (counts + lam) / (float(counts.sum()) + lam * size)

    def step(self, context: TokenSequence) -> StepOutput:
        dist = self.distribution(context.tokens)
        reprs = self._embeddings[np.asarray(context.tokens, dtype=np.intp)]
        return StepOutput(dist, reprs)
