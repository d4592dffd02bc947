"""Generation loop: stop conditions, determinism, failure handling, traces."""

import numpy as np
import pytest

import decokit.decoding as dec
from decokit.decoding import (
    ContrastiveDecoding,
    ContrastiveSearch,
    GenerationRecord,
    Greedy,
    Nucleus,
    StopReason,
    TopK,
    generate,
)
from decokit.errors import GenerationError, InputError, ProtocolError
from decokit.lm.toy import TableModel
from decokit.lm.types import TokenSequence, Vocabulary

from conftest import random_context, random_table_model


def chain_model(rng):
    """Deterministic chain: anything -> 1, after 1 -> eod (token 2)."""
    vocab = Vocabulary(3, 2)
    rows = {
        (): np.array([0.0, 1.0, 0.0]),
        (1,): np.array([0.0, 0.0, 1.0]),
    }
    return TableModel(vocab, rows, rng.normal(size=(3, 4)))


class FlakyModel:
    """Delegates to an inner model, then fails after a set number of steps."""

    def __init__(self, inner, good_steps):
        self._inner = inner
        self._good_steps = good_steps
        self.calls = 0

    @property
    def vocab(self):
        return self._inner.vocab

    def step(self, context):
        if self.calls >= self._good_steps:
            raise ProtocolError("backend went away")
        self.calls += 1
        return self._inner.step(context)


class TestStopConditions:
    def test_immediate_eod(self, rng):
        vocab = Vocabulary(3, 2)
        rows = {(): np.array([0.0, 0.0, 1.0])}
        model = TableModel(vocab, rows, rng.normal(size=(3, 4)))
        record = generate(model, TokenSequence((0,), vocab), Greedy(), max_length=10)
        assert record.stop_reason is StopReason.END_OF_DOCUMENT
        assert record.continuation.tokens == (2,)

    def test_eod_after_chain(self, rng):
        model = chain_model(rng)
        prompt = TokenSequence((0,), model.vocab)
        record = generate(model, prompt, Greedy(), max_length=10)
        assert record.continuation.tokens == (1, 2)
        assert record.stop_reason is StopReason.END_OF_DOCUMENT
        assert record.full_sequence.tokens == (0, 1, 2)

    def test_eod_on_final_permitted_step_counts_as_eod(self, rng):
        model = chain_model(rng)
        prompt = TokenSequence((0,), model.vocab)
        record = generate(model, prompt, Greedy(), max_length=2)
        assert record.continuation.tokens == (1, 2)
        assert record.stop_reason is StopReason.END_OF_DOCUMENT

    def test_max_length_without_eod_token(self, rng):
        vocab = Vocabulary(4, None)
        rows = {(): np.array([0.25, 0.25, 0.25, 0.25])}
        model = TableModel(vocab, rows, rng.normal(size=(4, 3)))
        record = generate(model, TokenSequence((0,), vocab), TopK(k=4), max_length=7, seed=1)
        assert record.stop_reason is StopReason.MAX_LENGTH
        assert len(record.continuation) == 7

    def test_max_length_when_eod_has_zero_mass(self, rng):
        vocab = Vocabulary(3, 2)
        rows = {(): np.array([0.5, 0.5, 0.0])}
        model = TableModel(vocab, rows, rng.normal(size=(3, 3)))
        record = generate(model, TokenSequence((0,), vocab), Nucleus(p=1.0), max_length=5, seed=3)
        assert record.stop_reason is StopReason.MAX_LENGTH
        assert len(record.continuation) == 5
        assert 2 not in record.continuation.tokens


class TestDeterminism:
    def test_greedy_ignores_seed(self, rng):
        model = random_table_model(rng, 6, eod=5)
        prompt = random_context(rng, model.vocab, 3)
        outs = {generate(model, prompt, Greedy(), max_length=8, seed=s).continuation.tokens
                for s in (0, 1, 17)}
        assert len(outs) == 1

    def test_same_seed_same_output(self, rng):
        model = random_table_model(rng, 6)
        prompt = random_context(rng, model.vocab, 2)
        spec = Nucleus(p=0.9)
        a = generate(model, prompt, spec, max_length=12, seed=5)
        b = generate(model, prompt, spec, max_length=12, seed=5)
        assert a.continuation.tokens == b.continuation.tokens
        assert a.stop_reason == b.stop_reason

    def test_seed_varies_output(self, rng):
        model = random_table_model(rng, 6)
        prompt = random_context(rng, model.vocab, 2)
        outs = {generate(model, prompt, TopK(k=6), max_length=12, seed=s).continuation.tokens
                for s in range(8)}
        assert len(outs) > 1

    def test_topk_one_equals_greedy(self, rng):
        model = random_table_model(rng, 7, eod=6)
        prompt = random_context(rng, model.vocab, 3)
        greedy = generate(model, prompt, Greedy(), max_length=10)
        narrowed = generate(model, prompt, TopK(k=1), max_length=10, seed=99)
        assert narrowed.continuation.tokens == greedy.continuation.tokens

    def test_record_carries_inputs(self, rng):
        model = random_table_model(rng, 5)
        prompt = random_context(rng, model.vocab, 2)
        spec = TopK(k=3)
        record = generate(model, prompt, spec, max_length=4, seed=42)
        assert record.prompt is prompt
        assert record.spec is spec
        assert record.seed == 42


class TestFailureHandling:
    def test_partial_continuation_on_mid_run_failure(self, rng):
        inner = random_table_model(rng, 6)
        flaky = FlakyModel(inner, good_steps=3)
        prompt = random_context(rng, inner.vocab, 2)
        with pytest.raises(GenerationError) as info:
            generate(flaky, prompt, TopK(k=6), max_length=10, seed=7)
        err = info.value
        assert isinstance(err.__cause__, ProtocolError)
        assert len(err.partial) == 3
        assert "3" in str(err)
        clean = generate(inner, prompt, TopK(k=6), max_length=10, seed=7)
        assert err.partial.tokens == clean.continuation.tokens[:3]

    def test_empty_prompt_rejected(self, rng):
        model = random_table_model(rng, 5)
        with pytest.raises(InputError):
            generate(model, TokenSequence((), model.vocab), Greedy())

    def test_bad_max_length_rejected(self, rng):
        model = random_table_model(rng, 5)
        prompt = random_context(rng, model.vocab, 2)
        with pytest.raises(InputError):
            generate(model, prompt, Greedy(), max_length=0)

    def test_contrastive_decoding_needs_amateur(self, rng):
        model = random_table_model(rng, 5)
        prompt = random_context(rng, model.vocab, 2)
        with pytest.raises(InputError):
            generate(model, prompt, ContrastiveDecoding())

    def test_contrastive_decoding_vocab_mismatch(self, rng):
        expert = random_table_model(rng, 5)
        amateur = random_table_model(rng, 6)
        prompt = random_context(rng, expert.vocab, 2)
        with pytest.raises(InputError):
            generate(expert, prompt, ContrastiveDecoding(), amateur=amateur)

    def test_amateur_ignored_for_plain_strategies(self, rng):
        model = random_table_model(rng, 5)
        other = random_table_model(rng, 5)
        prompt = random_context(rng, model.vocab, 2)
        alone = generate(model, prompt, Greedy(), max_length=6)
        with_amateur = generate(model, prompt, Greedy(), max_length=6, amateur=other)
        assert alone.continuation.tokens == with_amateur.continuation.tokens


class TestContrastivePaths:
    def test_contrastive_decoding_runs(self, rng):
        expert = random_table_model(rng, 6)
        amateur = random_table_model(rng, 6)
        prompt = random_context(rng, expert.vocab, 2)
        spec = ContrastiveDecoding(alpha=0.1, amateur_temperature=0.5)
        a = generate(expert, prompt, spec, max_length=6, amateur=amateur)
        b = generate(expert, prompt, spec, max_length=6, amateur=amateur)
        assert a.continuation.tokens == b.continuation.tokens
        assert len(a.continuation) == 6

    def test_contrastive_search_runs(self, rng):
        model = random_table_model(rng, 6, eod=5)
        prompt = random_context(rng, model.vocab, 2)
        record = generate(model, prompt, ContrastiveSearch(k=3, alpha=0.6), max_length=8)
        assert 1 <= len(record.continuation) <= 8


class TestTraces:
    def test_trace_matches_continuation(self, rng):
        model = random_table_model(rng, 6)
        prompt = random_context(rng, model.vocab, 2)
        trace = []
        record = generate(
            model, prompt, ContrastiveSearch(k=3, alpha=0.6),
            max_length=5, trace=trace,
        )
        assert len(trace) == len(record.continuation)
        for i, entry in enumerate(trace):
            assert entry.index == i
            assert entry.chosen == record.continuation.tokens[i]
            assert entry.chosen in entry.candidates
            assert entry.penalty is not None
            assert len(entry.penalty) == len(entry.candidates)

    def test_greedy_trace_is_single_candidate(self, rng):
        model = random_table_model(rng, 5)
        prompt = random_context(rng, model.vocab, 2)
        trace = []
        record = generate(model, prompt, Greedy(), max_length=3, trace=trace)
        for entry in trace:
            assert entry.candidates == (entry.chosen,)
            assert entry.penalty is None
        assert [e.chosen for e in trace] == list(record.continuation.tokens)

    def test_sampling_trace_reports_support(self, rng):
        model = random_table_model(rng, 6)
        prompt = random_context(rng, model.vocab, 2)
        trace = []
        generate(model, prompt, TopK(k=3), max_length=4, seed=2, trace=trace)
        for entry in trace:
            assert len(entry.candidates) == 3
            assert entry.chosen in entry.candidates
            assert all(c >= 0.0 for c in entry.confidence)


class TestRecordValidation:
    def test_eod_stop_requires_trailing_eod(self, rng):
        vocab = Vocabulary(3, 2)
        with pytest.raises(InputError):
            GenerationRecord(
                prompt=TokenSequence((0,), vocab),
                continuation=TokenSequence((1, 1), vocab),
                spec=Greedy(),
                seed=0,
                stop_reason=StopReason.END_OF_DOCUMENT,
            )

    def test_eod_must_not_appear_mid_continuation(self, rng):
        vocab = Vocabulary(3, 2)
        with pytest.raises(InputError):
            GenerationRecord(
                prompt=TokenSequence((0,), vocab),
                continuation=TokenSequence((2, 1), vocab),
                spec=Greedy(),
                seed=0,
                stop_reason=StopReason.MAX_LENGTH,
            )
