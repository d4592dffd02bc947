"""Decoding strategies over one-step language models.

Implements greedy, top-k sampling, nucleus sampling, typical sampling,
contrastive decoding (expert vs. temperature-scaled amateur log-odds over a
confidence-thresholded candidate head), and contrastive search (top-k
confidence minus an alpha-weighted maximum-cosine degeneration penalty
against the context representations), plus the shared generation loop.

Determinism rules used throughout: score and probability ties break toward
the lowest token id, and samplers draw from a caller-seeded generator, so a
(model, prompt, strategy, seed) tuple always reproduces the same output.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping, Union

import numpy as np

from .errors import DecokitError, GenerationError, InputError
from .lm import LanguageModel, TokenSequence, candidate_representation, step

# Guards cumulative-mass comparisons against float rounding so exactly
# representable boundaries (0.25 + 0.25 >= 0.5) land inside the support.
MASS_EPSILON = 1e-12

# Entropy-deviation ties at the typical-sampling boundary are honoured within
# this absolute slack; mathematically tied deviations can drift a few ulp
# apart once log/entropy arithmetic rounds.
DEVIATION_EPSILON = 1e-12


# ---------------------------------------------------------------------------
# strategy configurations


@dataclass(frozen=True)
class Greedy:
    """Always take the most probable token."""


@dataclass(frozen=True)
class TopK:
    """Sample among the k most probable tokens, renormalized."""

    k: int = 50

    def __post_init__(self) -> None:
        if int(self.k) < 1:
            raise InputError(f"top-k needs k >= 1, got {self.k}")
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class Nucleus:
    """Sample from the smallest high-probability prefix with mass >= p."""

    p: float = 0.95

    def __post_init__(self) -> None:
        if not 0.0 < float(self.p) <= 1.0:
            raise InputError(f"nucleus needs 0 < p <= 1, got {self.p}")
        object.__setattr__(self, "p", float(self.p))


@dataclass(frozen=True)
class Typical:
    """Sample from tokens whose surprisal is closest to the step entropy."""

    tau: float = 0.95

    def __post_init__(self) -> None:
        if not 0.0 < float(self.tau) <= 1.0:
            raise InputError(f"typical needs 0 < tau <= 1, got {self.tau}")
        object.__setattr__(self, "tau", float(self.tau))


@dataclass(frozen=True)
class ContrastiveDecoding:
    """Expert-vs-amateur log-odds over a confidence-thresholded head."""

    alpha: float = 0.1
    amateur_temperature: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < float(self.alpha) <= 1.0:
            raise InputError(f"contrastive decoding needs 0 < alpha <= 1, got {self.alpha}")
        if not float(self.amateur_temperature) > 0.0:
            raise InputError(
                f"amateur temperature must be positive, got {self.amateur_temperature}"
            )
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "amateur_temperature", float(self.amateur_temperature))


@dataclass(frozen=True)
class ContrastiveSearch:
    """Confidence minus degeneration penalty over the top-k candidates."""

    k: int = 5
    alpha: float = 0.6

    def __post_init__(self) -> None:
        if int(self.k) < 1:
            raise InputError(f"contrastive search needs k >= 1, got {self.k}")
        if not 0.0 <= float(self.alpha) <= 1.0:
            raise InputError(f"contrastive search needs 0 <= alpha <= 1, got {self.alpha}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "alpha", float(self.alpha))


DecodeSpec = Union[Greedy, TopK, Nucleus, Typical, ContrastiveDecoding, ContrastiveSearch]

STRATEGY_NAMES: dict[type, str] = {
    Greedy: "greedy",
    TopK: "top-k",
    Nucleus: "nucleus",
    Typical: "typical",
    ContrastiveDecoding: "contrastive-decoding",
    ContrastiveSearch: "contrastive-search",
}
_BY_NAME = {name: cls for cls, name in STRATEGY_NAMES.items()}


def spec_to_dict(spec: DecodeSpec) -> dict[str, Any]:
    """Serialize a strategy configuration to a plain JSON-ready dict."""
    if type(spec) not in STRATEGY_NAMES:
        raise InputError(f"unknown strategy object {spec!r}")
    out: dict[str, Any] = {"name": STRATEGY_NAMES[type(spec)]}
    out.update(dataclasses.asdict(spec))
    return out


def spec_from_dict(data: Mapping[str, Any]) -> DecodeSpec:
    """Parse a strategy dict; unknown names or parameters are input errors."""
    if not isinstance(data, Mapping) or "name" not in data:
        raise InputError(f"strategy must be an object with a name, got {data!r}")
    name = data["name"]
    cls = _BY_NAME.get(name)
    if cls is None:
        raise InputError(
            f"unknown strategy {name!r}; expected one of {sorted(_BY_NAME)}"
        )
    params = {k: v for k, v in data.items() if k != "name"}
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(params) - allowed
    if unknown:
        raise InputError(f"strategy {name!r} does not take {sorted(unknown)}")
    return cls(**params)


class StopReason(str, Enum):
    END_OF_DOCUMENT = "end_of_document"
    MAX_LENGTH = "max_length"


@dataclass(frozen=True)
class GenerationRecord:
    """One finished generation: prompt, continuation, and how it was made."""

    prompt: TokenSequence
    continuation: TokenSequence
    spec: DecodeSpec
    seed: int
    stop_reason: StopReason

    def __post_init__(self) -> None:
        eod = self.prompt.vocab.eod_token
        tokens = self.continuation.tokens
        if self.stop_reason is StopReason.END_OF_DOCUMENT:
            if eod is None or not tokens or tokens[-1] != eod:
                raise InputError(
                    "end-of-document stop requires the continuation to end with the eod token"
                )
        elif eod is not None and eod in tokens[:-1]:
            raise InputError("eod token may only appear as the final continuation token")

    @property
    def full_sequence(self) -> TokenSequence:
        return self.prompt.extend(self.continuation.tokens)


@dataclass
class StepTrace:
    """Diagnostic record of one decoding step."""

    index: int
    chosen: int
    candidates: tuple[int, ...]
    confidence: tuple[float, ...]
    penalty: tuple[float, ...] | None = None
    expert_logprob: tuple[float, ...] | None = None
    amateur_logprob: tuple[float, ...] | None = None
    flags: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# distribution helpers


def _as_distribution(dist) -> np.ndarray:
    arr = np.asarray(dist, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError("distribution must be a non-empty 1-D array")
    if not np.isfinite(arr).all() or np.any(arr < 0.0):
        raise InputError("distribution entries must be finite and non-negative")
    if abs(float(arr.sum()) - 1.0) > 1e-6:
        raise InputError(f"distribution sums to {float(arr.sum())!r}, expected 1")
    return arr


def _descending(arr: np.ndarray) -> np.ndarray:
    """Indices sorted by probability descending, ties toward lower ids."""
    return np.lexsort((np.arange(arr.size), -arr))


def _sample(ids: np.ndarray, probs: np.ndarray, rng: np.random.Generator) -> int:
    weights = probs / probs.sum()
    cum = np.cumsum(weights)
    u = rng.random()
    return int(ids[min(int(np.searchsorted(cum, u, side="right")), len(ids) - 1)])


def amateur_temperature_scale(dist, tau: float) -> np.ndarray:
    """Temperature-scale a distribution in log space and renormalize.

    tau == 1 is an exact identity so contrastive-decoding scores cancel
    bitwise when expert and amateur agree.
    """
    if not float(tau) > 0.0:
        raise InputError(f"temperature must be positive, got {tau}")
    arr = _as_distribution(dist)
    if float(tau) == 1.0:
        return arr
    with np.errstate(divide="ignore"):
        logits = np.log(arr) / float(tau)
    shifted = logits - logits.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


# ---------------------------------------------------------------------------
# single-step strategies over explicit distributions


def greedy_step(dist) -> int:
    """Most probable token, ties toward the lowest id."""
    arr = _as_distribution(dist)
    return int(_descending(arr)[0])


def topk_support(dist, k: int) -> np.ndarray:
    """The k most probable token ids (ids ascending); k clamps to the vocabulary."""
    arr = _as_distribution(dist)
    if k < 1:
        raise InputError(f"top-k needs k >= 1, got {k}")
    return np.sort(_descending(arr)[: min(k, arr.size)])


def topk_sample_step(dist, k: int, rng: np.random.Generator) -> int:
    """Sample among the k most probable tokens, renormalized."""
    arr = _as_distribution(dist)
    ids = topk_support(arr, k)
    return _sample(ids, arr[ids], rng)


def nucleus_support(dist, p: float) -> np.ndarray:
    """Smallest probability-descending prefix whose mass reaches p."""
    arr = _as_distribution(dist)
    if not 0.0 < p <= 1.0:
        raise InputError(f"nucleus needs 0 < p <= 1, got {p}")
    order = _descending(arr)
    cum = np.cumsum(arr[order])
    cut = int(np.argmax(cum >= p - MASS_EPSILON))
    return np.sort(order[: cut + 1])


def nucleus_sample_step(dist, p: float, rng: np.random.Generator) -> int:
    arr = _as_distribution(dist)
    ids = nucleus_support(arr, p)
    return _sample(ids, arr[ids], rng)


def typical_support(dist, tau: float) -> np.ndarray:
    """Tokens whose surprisal deviates least from the step entropy.

    Zero-probability tokens are excluded before ranking. Candidates are
    ordered by absolute deviation |surprisal - entropy| ascending (ties by
    id) and the support is the smallest such prefix with mass >= tau, plus
    any trailing tokens whose deviation ties the boundary token, so
    symmetric distributions keep their full symmetric support.
    """
    arr = _as_distribution(dist)
    if not 0.0 < tau <= 1.0:
        raise InputError(f"typical needs 0 < tau <= 1, got {tau}")
    pos = np.flatnonzero(arr > 0.0)
    logp = np.log(arr[pos])
    entropy = -float(np.dot(arr[pos], logp))
    dev = np.abs(-logp - entropy)
    order = np.lexsort((pos, dev))
    ordered_ids = pos[order]
    ordered_dev = dev[order]
    cum = np.cumsum(arr[ordered_ids])
    cut = int(np.argmax(cum >= tau - MASS_EPSILON))
    end = cut + 1
    while end < len(ordered_ids) and ordered_dev[end] <= ordered_dev[cut] + DEVIATION_EPSILON:
        end += 1
    return np.sort(ordered_ids[:end])


def typical_sample_step(dist, tau: float, rng: np.random.Generator) -> int:
    arr = _as_distribution(dist)
    ids = typical_support(arr, tau)
    return _sample(ids, arr[ids], rng)


# ---------------------------------------------------------------------------
# contrastive decoding


def cd_candidate_set(expert_dist, alpha: float) -> np.ndarray:
    """Head of tokens with expert probability >= alpha * max, ids ascending.

    Never empty: the argmax itself always passes the inclusive threshold.
    """
    arr = _as_distribution(expert_dist)
    if not 0.0 < alpha <= 1.0:
        raise InputError(f"contrastive decoding needs 0 < alpha <= 1, got {alpha}")
    return np.flatnonzero(arr >= alpha * float(arr.max()))


def _cd_choose(
    expert_dist: np.ndarray, amateur_dist: np.ndarray, alpha: float, tau: float
) -> tuple[int, StepTrace]:
    candidates = cd_candidate_set(expert_dist, alpha)
    scaled = amateur_temperature_scale(amateur_dist, tau)
    with np.errstate(divide="ignore"):
        expert_lp = np.log(expert_dist[candidates])
        amateur_lp = np.log(scaled[candidates])
    scores = expert_lp - amateur_lp
    flags = ("amateur_zero_probability",) if bool(np.isinf(scores).any()) else ()
    order = np.lexsort((candidates, -scores))
    chosen = int(candidates[order[0]])
    trace = StepTrace(
        index=-1,
        chosen=chosen,
        candidates=tuple(int(c) for c in candidates),
        confidence=tuple(float(v) for v in expert_dist[candidates]),
        expert_logprob=tuple(float(v) for v in expert_lp),
        amateur_logprob=tuple(float(v) for v in amateur_lp),
        flags=flags,
    )
    return chosen, trace


def cd_step(
    expert: LanguageModel,
    amateur: LanguageModel,
    context: TokenSequence,
    alpha: float = 0.1,
    amateur_temperature: float = 0.5,
) -> int:
    """One contrastive-decoding step; zero amateur mass scores +inf (flagged)."""
    if expert.vocab.size != amateur.vocab.size:
        raise InputError(
            f"expert vocabulary ({expert.vocab.size}) differs from "
            f"amateur vocabulary ({amateur.vocab.size})"
        )
    expert_dist = step(expert, context).distribution
    amateur_dist = step(amateur, context).distribution
    chosen, _ = _cd_choose(expert_dist, amateur_dist, alpha, amateur_temperature)
    return chosen


# ---------------------------------------------------------------------------
# contrastive search


def max_cosine_penalty(cand_reprs: np.ndarray, ctx_reprs: np.ndarray) -> tuple[np.ndarray, bool]:
    """Max cosine similarity of each candidate against all context vectors.

    Zero-norm vectors contribute cosine 0 instead of dividing by zero; the
    second return value reports whether that fallback fired.
    """

    cand = np.asarray(cand_reprs, dtype=np.float64)
    ctx = np.asarray(ctx_reprs, dtype=np.float64)
    cand_norms = np.linalg.norm(cand, axis=1, keepdims=True)
    ctx_norms = np.linalg.norm(ctx, axis=1, keepdims=True)
    cand_zero = cand_norms == 0.0
    ctx_zero = ctx_norms == 0.0
    sims = (cand / np.where(cand_zero, 1.0, cand_norms)) @ (
        ctx / np.where(ctx_zero, 1.0, ctx_norms)
    ).T
    np.clip(sims, -1.0, 1.0, out=sims)
    # A candidate vector identical to a context vector has cosine exactly 1,
    # a common case when a candidate token already occurs in the context.
    # The float path can land an ulp off and break the lowest-id tie rule.
    exact = (cand[:, None, :] == ctx[None, :, :]).all(axis=2)
    exact &= ~(cand_zero | ctx_zero.T)
    sims[exact] = 1.0
    return sims.max(axis=1), bool(cand_zero.any() or ctx_zero.any())


def _cs_choose(
    model: LanguageModel, context: TokenSequence, k: int, alpha: float
) -> tuple[int, StepTrace]:
    out = step(model, context)
    arr = out.distribution
    candidates = _descending(arr)[: min(k, arr.size)]
    confidences = arr[candidates]
    cand_reprs = np.stack(
        [candidate_representation(model, context, int(v)) for v in candidates]
    )
    penalties, zero_norm = max_cosine_penalty(cand_reprs, out.representations)
    scores = (1.0 - alpha) * confidences - alpha * penalties
    order = np.lexsort((candidates, -scores))
    chosen = int(candidates[order[0]])
    trace = StepTrace(
        index=-1,
        chosen=chosen,
        candidates=tuple(int(c) for c in candidates),
        confidence=tuple(float(v) for v in confidences),
        penalty=tuple(float(v) for v in penalties),
        flags=("zero_norm_representation",) if zero_norm else (),
    )
    return chosen, trace


def cs_step(model: LanguageModel, context: TokenSequence, k: int = 5, alpha: float = 0.6) -> int:
    """One contrastive-search step over the model's top-k candidates.

    alpha = 0 reduces to greedy exactly: scores equal raw confidences
    bitwise, and the candidate set always contains the global argmax.
    """
    if k < 1:
        raise InputError(f"contrastive search needs k >= 1, got {k}")
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"contrastive search needs 0 <= alpha <= 1, got {alpha}")
    chosen, _ = _cs_choose(model, context, k, alpha)
    return chosen


# ---------------------------------------------------------------------------
# generation loop


def _dispatch(
    model: LanguageModel,
    amateur: LanguageModel | None,
    context: TokenSequence,
    spec: DecodeSpec,
    rng: np.random.Generator,
) -> tuple[int, StepTrace]:
    if isinstance(spec, (Greedy, TopK, Nucleus, Typical)):
        arr = step(model, context).distribution
        if isinstance(spec, Greedy):
            chosen = greedy_step(arr)
            support = np.asarray([chosen])
        elif isinstance(spec, TopK):
            support = topk_support(arr, spec.k)
            chosen = _sample(support, arr[support], rng)
        elif isinstance(spec, Nucleus):
            support = nucleus_support(arr, spec.p)
            chosen = _sample(support, arr[support], rng)
        else:
            support = typical_support(arr, spec.tau)
            chosen = _sample(support, arr[support], rng)
        trace = StepTrace(
            index=-1,
            chosen=chosen,
            candidates=tuple(int(c) for c in support),
            confidence=tuple(float(v) for v in arr[support]),
        )
        return chosen, trace
    if isinstance(spec, ContrastiveDecoding):
        assert amateur is not None
        expert_dist = step(model, context).distribution
        amateur_dist = step(amateur, context).distribution
        return _cd_choose(expert_dist, amateur_dist, spec.alpha, spec.amateur_temperature)
    if isinstance(spec, ContrastiveSearch):
        return _cs_choose(model, context, spec.k, spec.alpha)
    raise InputError(f"unknown strategy object {spec!r}")


def generate(
    model: LanguageModel,
    prompt: TokenSequence,
    spec: DecodeSpec,
    *,
    max_length: int = 256,
    seed: int = 0,
    amateur: LanguageModel | None = None,
    trace: list[StepTrace] | None = None,
) -> GenerationRecord:
    """Decode one continuation.

    Stops when the model emits the vocabulary's end-of-document token or
    when ``max_length`` tokens have been generated, whichever comes first.
    Mid-run model failures raise GenerationError carrying the partial
    continuation. Pass a list as ``trace`` to collect per-step diagnostics.
    """
    if len(prompt) == 0:
        raise InputError("prompt must contain at least one token")
    if max_length < 1:
        raise InputError(f"max_length must be at least 1, got {max_length}")
    if isinstance(spec, ContrastiveDecoding):
        if amateur is None:
            raise InputError("contrastive decoding requires an amateur model")
        if amateur.vocab.size != model.vocab.size:
            raise InputError(
                f"expert vocabulary ({model.vocab.size}) differs from "
                f"amateur vocabulary ({amateur.vocab.size})"
            )

    rng = np.random.default_rng(seed)
    vocab = model.vocab
    generated: list[int] = []
    stop_reason = StopReason.MAX_LENGTH
    while len(generated) < max_length:
        context = prompt.extend(generated)
        try:
            token, step_trace = _dispatch(model, amateur, context, spec, rng)
        except DecokitError as err:
            raise GenerationError(
                f"generation aborted after {len(generated)} tokens: {err}",
                partial=TokenSequence(tuple(generated), vocab),
            ) from err
        generated.append(token)
        if trace is not None:
            step_trace.index = len(generated) - 1
            trace.append(step_trace)
        if vocab.eod_token is not None and token == vocab.eod_token:
            stop_reason = StopReason.END_OF_DOCUMENT
            break
    return GenerationRecord(
        prompt=prompt,
        continuation=TokenSequence(tuple(generated), vocab),
        spec=spec,
        seed=int(seed),
        stop_reason=stop_reason,
    )
