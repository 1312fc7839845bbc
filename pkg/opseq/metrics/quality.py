import logging
import sys
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from editdistance import eval as levenshtein
from nltk.translate.bleu_score import SmoothingFunction, corpus_bleu

logger = logging.getLogger(__name__)

MAX_ORDER = 4
WEIGHTS = (1 / MAX_ORDER,) * MAX_ORDER
SMOOTHING_EPSILON = 0.1

# a zero precision caps the geometric mean near this value
_ZERO_ORDER_BOUND = 2 * sys.float_info.min ** (1 / MAX_ORDER)


@dataclass(frozen=True)
class EvalPair:
    """A hypothesis and its reference, as word sequences (either may be empty)."""

    hypothesis: Tuple[str, ...]
    reference: Tuple[str, ...]

    def __post_init__(self):
        if self.hypothesis is None or self.reference is None:
            raise ValueError("Hypothesis and reference must not be None")
        object.__setattr__(self, "hypothesis", tuple(self.hypothesis))
        object.__setattr__(self, "reference", tuple(self.reference))

    @classmethod
    def from_text(cls, hypothesis: str, reference: str) -> "EvalPair":
        return cls(tuple(hypothesis.split()), tuple(reference.split()))


def _edits(pair: EvalPair) -> int:
    return levenshtein(list(pair.hypothesis), list(pair.reference))


def wer(pair: EvalPair) -> float:
    """
    Word error rate of one pair: unit-cost edit distance over reference length.

    An empty reference scores the hypothesis length (0.0 when both are empty).
    """
    if not pair.reference:
        if pair.hypothesis:
            logger.warning("Empty reference: WER set to the hypothesis length %d", len(pair.hypothesis))
        return float(len(pair.hypothesis))
    return _edits(pair) / len(pair.reference)


def corpus_wer(pairs: Iterable[EvalPair]) -> float:
    """Total edits over total reference words."""
    edits, words = 0, 0
    for pair in pairs:
        edits += _edits(pair)
        words += len(pair.reference)
    if words == 0:
        if edits:
            logger.warning("Empty references: corpus WER set to the hypothesis length %d", edits)
        return float(edits)
    return edits / words


def _fold(words: Sequence[str]) -> List[str]:
    return [w.lower() for w in words]


def bleu(corpus: Iterable[EvalPair], smooth: bool = False) -> float:
    """
    Corpus-level, case-insensitive BLEU-4 on a 0-100 scale.

    Modified n-gram counts are summed over the corpus before taking the
    geometric mean; every sentence adds at least 1 to each denominator.
    Any zero precision gives 0 unless smooth is set, in which case zero
    counts are replaced by epsilon over the denominator.

    Args:
        corpus: The evaluation pairs, one reference each
        smooth: Apply add-epsilon smoothing to zero precisions

    Returns:
        The BLEU score
    """
    references, hypotheses = [], []
    for pair in corpus:
        references.append([_fold(pair.reference)])
        hypotheses.append(_fold(pair.hypothesis))
    if not any(hypotheses):
        return 0.0

    smoothing = SmoothingFunction(epsilon=SMOOTHING_EPSILON)
    score = corpus_bleu(references, hypotheses, weights=WEIGHTS,
                        smoothing_function=smoothing.method1 if smooth else smoothing.method0)
    # method0 stands in sys.float_info.min for a zero precision
    if score <= _ZERO_ORDER_BOUND:
        return 0.0
    return 100.0 * score
