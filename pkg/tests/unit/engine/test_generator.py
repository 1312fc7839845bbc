"""
Unit tests for the random pair generator and stream corruptions.
"""

import pytest

from opseq.codecs.absolute import AbsoluteCodec
from opseq.codecs.relative import RelativeCodec
from opseq.core.tokens import tokenize
from opseq.engine.generator import CORRUPTIONS, RandomPairGenerator
from opseq.ingest.tuples import build_tuples


class TestRandomPairGenerator:
    """Test pair generation."""

    def test_seed_is_reproducible(self):
        """Test that the same seed draws the same pairs."""
        first = RandomPairGenerator(seed=7).pairs(20)
        second = RandomPairGenerator(seed=7).pairs(20)

        assert first == second

    def test_pairs_are_well_formed(self, generator):
        """Test lengths and link bounds."""
        for pair in generator.pairs(100):
            assert 1 <= len(pair.src) <= generator.max_src_len
            assert len(pair.tgt) >= 1
            assert all(1 <= i <= len(pair.src) and 1 <= j <= len(pair.tgt) for i, j in pair.links)

    def test_monotone_links(self, generator):
        """Test that monotone pairs never cross links."""
        for pair in generator.pairs(100, monotone=True):
            sources = [i for i, _ in sorted(pair.links, key=lambda link: link[1])]
            assert sources == sorted(sources)

    def test_words_have_pieces(self):
        """Test that some words are split into two pieces."""
        generator = RandomPairGenerator(seed=3, split_prob=1.0)
        words = [generator.word() for _ in range(50)]

        assert any(len(w.pieces) == 2 for w in words)
        assert all(1 <= len(w.pieces) <= 2 for w in words)


class TestCorrupt:
    """Test structural corruptions."""

    @pytest.mark.parametrize("kind", CORRUPTIONS)
    def test_every_corruption_breaks_the_grammar(self, generator, kind):
        """Test that each corruption is rejected by both validators."""
        for codec in (AbsoluteCodec(), RelativeCodec()):
            for pair in generator.pairs(30):
                stream = codec.encode(build_tuples(pair))
                corrupted, applied = generator.corrupt(stream, codec.variant, kind)

                assert applied == kind
                assert not codec.validate(corrupted)

    def test_word_drop_keeps_operation_lists_apart(self):
        """Test that a relative word followed by another operation list is never dropped."""
        stream = tokenize("a [SM] x [EOP] b [JB] y [SM] z [EOP] [EOS]")
        generator = RandomPairGenerator(seed=0)

        for _ in range(50):
            corrupted, _ = generator.corrupt(stream, "rel", "drop-word-start")
            words = [t.surface for t in corrupted if t.is_word_start]

            assert "y" in words
            assert len(words) == 4
            assert not RelativeCodec().validate(corrupted)

    def test_merged_operation_lists_are_grammatical(self):
        """Test the stream a dropped mid-tuple word would leave: valid, but decoding differently."""
        codec = RelativeCodec()
        merged = "a [SM] x [EOP] b [JB] [SM] z [EOP] [EOS]"

        assert codec.validate(merged.split())
        assert codec.decode(merged.split()).target_text == "z x"
        assert codec.decode("a [SM] x [EOP] b [JB] y [SM] z [EOP] [EOS]".split()).target_text == "y z x"

    def test_random_kind(self, generator, swap_pair):
        """Test that a kind is drawn when none is given."""
        stream = RelativeCodec().encode(build_tuples(swap_pair))
        _, kind = generator.corrupt(stream, "rel")

        assert kind in CORRUPTIONS

    def test_unknown_kind(self, generator, swap_pair):
        """Test that an unknown corruption is a ValueError."""
        stream = AbsoluteCodec().encode(build_tuples(swap_pair))

        with pytest.raises(ValueError):
            generator.corrupt(stream, "abs", "shuffle")
