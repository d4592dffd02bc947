"""Shared fixtures and model builders."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from decokit.lm import TableModel, TokenSequence, Vocabulary


def random_distribution(rng: np.random.Generator, size: int, zeros: int = 0) -> np.ndarray:
    """A random distribution, optionally with exact zeros."""
    weights = rng.random(size) + 1e-3
    if zeros:
        idx = rng.choice(size, size=min(zeros, size - 1), replace=False)
        weights[idx] = 0.0
    return weights / weights.sum()


def random_table_model(
    rng: np.random.Generator,
    vocab_size: int,
    dim: int = 3,
    *,
    eod: int | None = None,
    order: int = 1,
) -> TableModel:
    """A fully random order-1 context table plus an unconditional row."""
    vocab = Vocabulary(vocab_size, eod)
    rows = {(): random_distribution(rng, vocab_size)}
    if order >= 1:
        for t in range(vocab_size):
            rows[(t,)] = random_distribution(rng, vocab_size)
    vectors = rng.normal(size=(vocab_size, dim))
    return TableModel(vocab, rows, vectors, order=order)


def random_context(rng: np.random.Generator, vocab: Vocabulary, length: int) -> TokenSequence:
    return TokenSequence(tuple(int(t) for t in rng.integers(0, vocab.size, size=length)), vocab)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
