"""
Integration tests for the end-to-end properties of both serializations.

These runs draw seeded random instances and check round trips, grammar
soundness under corruption, streaming equivalence and the metric oracles.
"""

import math
import time
from collections import Counter

import pytest

from opseq.codecs.absolute import AbsoluteCodec
from opseq.codecs.relative import RelativeCodec
from opseq.core.errors import DecodeError
from opseq.core.tokens import JB, JF, SM
from opseq.core.types import AlignedSentencePair, Word
from opseq.engine.generator import CORRUPTIONS, RandomPairGenerator
from opseq.engine.harness import INTERPRETER_ERROR, REJECTED, RoundTripHarness
from opseq.engine.session import replay
from opseq.ingest.filters import filter_record
from opseq.ingest.tuples import build_tuples
from opseq.metrics.latency import LatencyTrace, average_lagging
from opseq.metrics.quality import EvalPair, bleu

INSTANCES = 2000


class TestRoundTripProperties:
    """Test both variants on seeded random instances."""

    def test_harness_run(self):
        """Run every harness check on a batch of random instances."""
        harness = RoundTripHarness(RandomPairGenerator(seed=2024))
        report = harness.run(INSTANCES)

        assert report.ok, report.first_failure
        assert set(report.corruptions) <= {f"{v}:{o}" for v in ("abs", "rel") for o in (REJECTED, INTERPRETER_ERROR)}

    def test_plain_round_trip_is_fast(self):
        """Test encode and decode alone on both variants within the time budget."""
        generator = RandomPairGenerator(seed=7)
        codecs = (AbsoluteCodec(), RelativeCodec())
        start = time.time()
        for pair in generator.pairs(INSTANCES):
            tuples = build_tuples(pair)
            for codec in codecs:
                assert tuple(codec.decode(codec.encode(tuples))) == (pair.src, pair.tgt)
        assert time.time() - start < 60

    def test_corruptions_never_pass_silently(self):
        """Test 100 seeded corruptions per variant."""
        generator = RandomPairGenerator(seed=11)
        for codec in (AbsoluteCodec(), RelativeCodec()):
            outcomes = Counter()
            for pair in generator.pairs(100):
                stream = codec.encode(build_tuples(pair))
                corrupted, _ = generator.corrupt(stream, codec.variant)
                if not codec.validate(corrupted):
                    outcomes[REJECTED] += 1
                    continue
                with pytest.raises(DecodeError):
                    codec.decode(corrupted)
                outcomes[INTERPRETER_ERROR] += 1
            assert sum(outcomes.values()) == 100

    def test_every_corruption_kind_is_exercised(self):
        """Test that random draws cover all corruption kinds."""
        generator = RandomPairGenerator(seed=12)
        stream = RelativeCodec().encode(build_tuples(generator.pair()))
        kinds = {generator.corrupt(stream, "rel")[1] for _ in range(200)}

        assert kinds == set(CORRUPTIONS)

    def test_monotone_zero(self):
        """Test that 1000 monotone instances compile without moves."""
        codec = RelativeCodec()
        for pair in RandomPairGenerator(seed=5).pairs(1000, monotone=True):
            stream = codec.encode(build_tuples(pair))
            assert not any(t.surface in (SM, JB, JF) for t in stream)

    def test_online_matches_offline(self):
        """Test streaming against offline decoding on both variants."""
        generator = RandomPairGenerator(seed=9)
        for pair in generator.pairs(300):
            tuples = build_tuples(pair)
            finals = []
            for codec in (AbsoluteCodec(), RelativeCodec()):
                stream = codec.encode(tuples)
                session = replay(stream, codec=codec)
                offline = codec.decode(stream)
                assert session.final().translation == offline.translation
                sources = [s.transcription for s in session.snapshots]
                assert all(b[:len(a)] == a for a, b in zip(sources, sources[1:]))
                finals.append(tuple(session.final()))
            assert finals[0] == finals[1]


class TestWorkedExamples:
    """Test the worked examples and metric oracles."""

    def test_swap_partials(self):
        """Test the delayed reordering of the swap stream."""
        session = replay("a [SM] x [EOP] b [JB] y [EOP] [EOS]")

        assert session.final().source_text == "a b"
        assert session.final().target_text == "y x"
        assert [text for _, text in session.partial_hypotheses()] == ["x", "y x"]

    def test_bleu_oracles(self):
        """Test identity and a hand-computed smoothed single pair."""
        assert bleu([EvalPair.from_text("a b c d e", "a b c d e")]) == 100.0
        expected = 100.0 * math.exp(-0.5) * math.sqrt(0.1)
        assert abs(bleu([EvalPair.from_text("a b", "a b c")], smooth=True) - expected) < 1e-9

    def test_wait_one(self):
        """Test Average Lagging of a wait-1 trace."""
        assert average_lagging(LatencyTrace([1, 2], src_len=2, tgt_len=2)) == pytest.approx(1.0)

    def test_filter_boundaries(self):
        """Test the ratio and target length boundaries."""
        def pair(src_len, tgt_len):
            return AlignedSentencePair(tuple(Word.of("s") for _ in range(src_len)),
                                       tuple(Word.of("t") for _ in range(tgt_len)))

        assert not filter_record(pair(11, 2)).keep
        assert filter_record(pair(10, 2)).keep
        assert not filter_record(pair(151, 151)).keep
        assert filter_record(pair(150, 150)).keep
