"""
Unit tests for the corpus length filters.
"""

from opseq.core.types import AlignedSentencePair, Word
from opseq.ingest.filters import filter_record


def _pair(src_len, tgt_words):
    return AlignedSentencePair(tuple(Word.of(f"s{i}") for i in range(src_len)), tuple(tgt_words))


class TestFilterRecord:
    """Test the keep/drop decisions."""

    def test_ratio_boundary(self):
        """Test that only a ratio strictly greater than the maximum drops the pair."""
        assert not filter_record(_pair(11, [Word.of("x"), Word.of("y")])).keep
        assert filter_record(_pair(10, [Word.of("x"), Word.of("y")])).keep

    def test_ratio_is_symmetric(self):
        """Test the ratio in the target-longer direction."""
        decision = filter_record(_pair(1, [Word.of("x")] * 6))

        assert not decision.keep
        assert "ratio" in decision.reason

    def test_target_token_boundary(self):
        """Test that target length counts word pieces."""
        kept = [Word.of(f"t{i}") for i in range(150)]
        dropped = kept[:-1] + [Word.of("t", "z")]

        assert filter_record(_pair(150, kept)).keep
        decision = filter_record(_pair(150, dropped))
        assert not decision.keep
        assert "151" in decision.reason

    def test_empty_side_is_degenerate(self):
        """Test that an empty side is dropped and flagged."""
        decision = filter_record(_pair(0, [Word.of("x")]))

        assert not decision.keep
        assert decision.degenerate

    def test_custom_limits(self):
        """Test overriding the limits."""
        pair = _pair(3, [Word.of("x")])

        assert not filter_record(pair, max_ratio=2.0).keep
        assert not filter_record(_pair(1, [Word.of("x", "y")]), max_tgt_len=1).keep
