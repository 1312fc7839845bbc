import logging
from dataclasses import dataclass
from typing import Optional

from opseq.core.types import AlignedSentencePair

logger = logging.getLogger(__name__)

DEFAULT_MAX_RATIO = 5.0
DEFAULT_MAX_TGT_LEN = 150


@dataclass(frozen=True)
class FilterDecision:
    """Keep/drop verdict for one corpus record."""

    keep: bool
    reason: Optional[str] = None
    degenerate: bool = False


def filter_record(pair: AlignedSentencePair, max_ratio: float = DEFAULT_MAX_RATIO,
                  max_tgt_len: int = DEFAULT_MAX_TGT_LEN) -> FilterDecision:
    """
    Apply the corpus length filters.

    A record is dropped when the word-length ratio between the sides is
    greater than max_ratio or the target side has more than max_tgt_len
    tokens (word pieces). Records with an empty side are dropped as
    degenerate.

    Args:
        pair: The aligned sentence pair
        max_ratio: Largest allowed length ratio in either direction
        max_tgt_len: Largest allowed number of target tokens

    Returns:
        The FilterDecision
    """
    src_len, tgt_len = len(pair.src), len(pair.tgt)
    if src_len == 0 or tgt_len == 0:
        return FilterDecision(False, "degenerate: empty side", degenerate=True)

    ratio = max(src_len / tgt_len, tgt_len / src_len)
    if ratio > max_ratio:
        logger.debug("Dropping pair with length ratio %g", ratio)
        return FilterDecision(False, f"length ratio {ratio:g} > {max_ratio:g}")

    tgt_tokens = sum(len(word.pieces) for word in pair.tgt)
    if tgt_tokens > max_tgt_len:
        logger.debug("Dropping pair with %d target tokens", tgt_tokens)
        return FilterDecision(False, f"target length {tgt_tokens} > {max_tgt_len}")

    return FilterDecision(True)
