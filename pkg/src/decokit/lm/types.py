"""Core model-facing data types.

Every decoder and metric in this package talks to a language model through
the same narrow surface: a vocabulary, immutable token sequences, and a
one-step query that returns the next-token distribution together with one
representation vector per context token.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Protocol, runtime_checkable

import numpy as np

from ..errors import InputError, ProtocolError

# step() distributions must sum to 1 within this bound.
DISTRIBUTION_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Vocabulary:
    """Token-id space of a model plus the optional end-of-document id."""

    size: int
    eod_token: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.size, int) or self.size < 2:
            raise InputError(f"vocabulary size must be an int >= 2, got {self.size!r}")
        if self.eod_token is not None and not (0 <= int(self.eod_token) < self.size):
            raise InputError(
                f"end-of-document token {self.eod_token} outside vocabulary of size {self.size}"
            )


@dataclass(frozen=True)
class TokenSequence:
    """Immutable sequence of token ids validated against a vocabulary."""

    tokens: tuple[int, ...]
    vocab: Vocabulary

    def __post_init__(self) -> None:
        toks = tuple(int(t) for t in self.tokens)
        for t in toks:
            if not 0 <= t < self.vocab.size:
                raise InputError(
                    f"token id {t} outside vocabulary of size {self.vocab.size}"
                )
        object.__setattr__(self, "tokens", toks)

    def __len__(self) -> int:
        return len(self.tokens)

    def append(self, token: int) -> TokenSequence:
        return TokenSequence(self.tokens + (int(token),), self.vocab)

    def extend(self, tokens: Iterable[int]) -> TokenSequence:
        return TokenSequence(self.tokens + tuple(int(t) for t in tokens), self.vocab)

    def truncate(self, limit: int) -> TokenSequence:
        if limit < 0:
            raise InputError(f"truncation limit must be non-negative, got {limit}")
        return TokenSequence(self.tokens[:limit], self.vocab)


@dataclass(frozen=True)
class StepOutput:
    """One model query: next-token distribution and context representations.

    ``distribution`` has one non-negative entry per vocabulary item and sums
    to 1 within DISTRIBUTION_TOLERANCE; ``representations`` holds one fixed-
    width vector per context token, in context order.
    """

    distribution: np.ndarray
    representations: np.ndarray

    def __post_init__(self) -> None:
        dist = np.asarray(self.distribution, dtype=np.float64)
        reprs = np.asarray(self.representations, dtype=np.float64)
        if dist.ndim != 1 or dist.size == 0:
            raise InputError("distribution must be a non-empty 1-D array")
        if not np.isfinite(dist).all() or np.any(dist < 0.0):
            raise InputError("distribution entries must be finite and non-negative")
        total = float(dist.sum())
        if abs(total - 1.0) > DISTRIBUTION_TOLERANCE:
            raise InputError(f"distribution sums to {total!r}, expected 1")
        if reprs.ndim != 2 or reprs.shape[1] < 1:
            raise InputError("representations must be a 2-D array with width >= 1")
        object.__setattr__(self, "distribution", dist)
        object.__setattr__(self, "representations", reprs)


@runtime_checkable
class LanguageModel(Protocol):
    """Contract every decoder consumes.

    Implementations must be deterministic: the same context always yields
    the same distribution and representations.
    """

    @property
    def vocab(self) -> Vocabulary: ...

    def step(self, context: TokenSequence) -> StepOutput: ...


@dataclass(frozen=True)
class SequenceScore:
    """Per-token conditional log-probabilities of a continuation.

    Zero-probability tokens are recorded as ``-inf`` and flip ``degenerate``;
    no exception is raised so scoring long corpora never aborts.
    """

    logprobs: np.ndarray
    degenerate: bool


def step(model: LanguageModel, context: TokenSequence) -> StepOutput:
    """Query one step and check the model honoured its output contract."""
    if len(context) == 0:
        raise InputError("context must contain at least one token")
    out = model.step(context)
    if out.distribution.shape[0] != model.vocab.size:
        raise ProtocolError(
            f"model returned {out.distribution.shape[0]} probabilities "
            f"for a vocabulary of size {model.vocab.size}"
        )
    if out.representations.shape[0] != len(context):
        raise ProtocolError(
            f"model returned {out.representations.shape[0]} representations "
            f"for {len(context)} context tokens"
        )
    return out


def score_sequence(
    model: LanguageModel, prefix: TokenSequence, continuation: TokenSequence
) -> SequenceScore:
    """Conditional log-probability of each continuation token given the prefix."""
    if len(prefix) == 0:
        raise InputError("prefix must contain at least one token")
    if len(continuation) == 0:
        raise InputError("continuation must contain at least one token")
    if prefix.vocab.size != continuation.vocab.size:
        raise InputError("prefix and continuation use different vocabularies")
    scorer = getattr(model, "score_sequence", None)
    if scorer is not None:
        logprobs = np.asarray(scorer(prefix, continuation), dtype=np.float64)
    else:
        values = []
        context = prefix
        for token in continuation.tokens:
            p = float(step(model, context).distribution[token])
            values.append(np.log(p) if p > 0.0 else -np.inf)
            context = context.append(token)
        logprobs = np.asarray(values, dtype=np.float64)
    return SequenceScore(logprobs, degenerate=bool(np.isinf(logprobs).any()))


def candidate_representation(
    model: LanguageModel, context: TokenSequence, candidate: int
) -> np.ndarray:
    """Representation a candidate token would get appended to the context."""
    if not 0 <= int(candidate) < model.vocab.size:
        raise InputError(
            f"candidate id {candidate} outside vocabulary of size {model.vocab.size}"
        )
    out = step(model, context.append(candidate))
    return out.representations[-1]
