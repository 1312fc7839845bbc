"""
Unit tests for WER and BLEU.
"""

import itertools
import math

import numpy as np
import pytest

from opseq.metrics.quality import EvalPair, bleu, corpus_wer, wer


def _dp_distance(hyp, ref):
    table = np.zeros((len(hyp) + 1, len(ref) + 1), dtype=int)
    table[:, 0] = np.arange(len(hyp) + 1)
    table[0, :] = np.arange(len(ref) + 1)
    for i in range(1, len(hyp) + 1):
        for j in range(1, len(ref) + 1):
            table[i, j] = min(table[i - 1, j] + 1, table[i, j - 1] + 1,
                              table[i - 1, j - 1] + (hyp[i - 1] != ref[j - 1]))
    return int(table[-1, -1])


def _sequences(max_len, symbols="abc"):
    for n in range(max_len + 1):
        yield from itertools.product(symbols, repeat=n)


class TestWer:
    """Test the word error rate."""

    def test_examples(self):
        """Test substitutions, insertions and deletions."""
        assert wer(EvalPair.from_text("a b c", "a b c")) == 0.0
        assert wer(EvalPair.from_text("a x c", "a b c")) == pytest.approx(1 / 3)
        assert wer(EvalPair.from_text("a b c d", "a b")) == pytest.approx(1.0)
        assert wer(EvalPair.from_text("", "a b")) == pytest.approx(1.0)

    def test_empty_reference(self):
        """Test that an empty reference scores the hypothesis length."""
        assert wer(EvalPair.from_text("a b", "")) == 2.0
        assert wer(EvalPair.from_text("", "")) == 0.0

    def test_matches_exhaustive_oracle(self):
        """Test against a dynamic program on every short sequence pair."""
        short = list(_sequences(4))
        for hyp, ref in itertools.product(short, short):
            if not ref:
                continue
            assert wer(EvalPair(hyp, ref)) == pytest.approx(_dp_distance(hyp, ref) / len(ref))

    def test_matches_sampled_oracle(self):
        """Test against the dynamic program on longer random sequences."""
        rng = np.random.default_rng(0)
        for _ in range(300):
            hyp = tuple(rng.choice(list("abcd"), size=int(rng.integers(0, 9))))
            ref = tuple(rng.choice(list("abcd"), size=int(rng.integers(1, 9))))
            assert wer(EvalPair(hyp, ref)) == pytest.approx(_dp_distance(hyp, ref) / len(ref))

    def test_corpus_wer(self):
        """Test that corpus WER pools edits and reference words."""
        pairs = [EvalPair.from_text("a x", "a b"), EvalPair.from_text("c d e f", "c d e f")]

        assert corpus_wer(pairs) == pytest.approx(1 / 6)

    def test_none_rejected(self):
        """Test that missing sides are rejected."""
        with pytest.raises(ValueError):
            EvalPair(None, ("a",))


class TestBleu:
    """Test corpus BLEU."""

    def test_identical(self):
        """Test that identity scores 100."""
        corpus = [EvalPair.from_text("the cat sat on the mat", "the cat sat on the mat")]

        assert bleu(corpus) == pytest.approx(100.0)

    def test_case_insensitive(self):
        """Test that case is folded."""
        corpus = [EvalPair.from_text("The Cat sat on the MAT", "the cat sat on the mat")]

        assert bleu(corpus) == pytest.approx(100.0)

    def test_brevity_penalty(self):
        """Test a short hypothesis with perfect precisions."""
        corpus = [EvalPair.from_text("a b c d", "a b c d e")]

        assert bleu(corpus) == pytest.approx(100.0 * math.exp(-0.25))

    def test_zero_precision(self):
        """Test that a missing 4-gram order zeroes the score."""
        corpus = [EvalPair.from_text("a b c", "a b c")]

        assert bleu(corpus) == 0.0

    def test_smoothing(self):
        """Test add-epsilon smoothing of zero precisions."""
        corpus = [EvalPair.from_text("a b c", "a b c")]

        # p1..p3 = 1; no 4-grams, so p4 = 0.1 over a denominator floored at 1
        assert bleu(corpus, smooth=True) == pytest.approx(100.0 * math.exp(math.log(0.1) / 4))

    def test_smoothing_with_brevity(self):
        """Test smoothing together with the brevity penalty."""
        corpus = [EvalPair.from_text("a b", "a b c d")]

        expected = 100.0 * math.exp(1 - 4 / 2) * math.exp((math.log(0.1) + math.log(0.1)) / 4)
        assert bleu(corpus, smooth=True) == pytest.approx(expected)

    def test_counts_pool_over_corpus(self):
        """Test that n-gram counts are summed before the geometric mean."""
        sentence = "one two three four five"
        corpus = [EvalPair.from_text(sentence, sentence), EvalPair.from_text("w x y z", "one two three four")]

        # p1 = 5/9, p2 = 4/7, p3 = 3/5, p4 = 2/3; lengths 9 and 9
        expected = 100.0 * math.exp((math.log(5 / 9) + math.log(4 / 7) + math.log(3 / 5) + math.log(2 / 3)) / 4)
        assert bleu(corpus) == pytest.approx(expected)

    def test_short_sentence_denominators(self):
        """Test that a sentence without n-grams of some order still counts 1 for it."""
        sentence = "one two three four five"
        corpus = [EvalPair.from_text(sentence, sentence), EvalPair.from_text("x y", "one two")]

        # p1 = 5/7, p2 = 4/5, p3 = 3/(3 + 1), p4 = 2/(2 + 1); lengths 7 and 7
        expected = 100.0 * math.exp((math.log(5 / 7) + math.log(4 / 5) + math.log(3 / 4) + math.log(2 / 3)) / 4)
        assert bleu(corpus) == pytest.approx(expected)

    def test_corpus_order_does_not_matter(self):
        """Test that BLEU is the same for every order of the corpus."""
        corpus = [
            EvalPair.from_text("the cat sat on the mat", "the cat sat on a mat"),
            EvalPair.from_text("a b c d e", "a b x d e f"),
            EvalPair.from_text("one two", "one two three"),
            EvalPair.from_text("Hello World again today", "hello world again"),
        ]
        for smooth in (False, True):
            expected = bleu(corpus, smooth)
            assert expected > 0
            for order in itertools.permutations(corpus):
                assert bleu(list(order), smooth) == pytest.approx(expected, rel=1e-12)

    def test_empty_hypotheses(self):
        """Test that an empty output scores 0."""
        assert bleu([EvalPair.from_text("", "a b c d")]) == 0.0
