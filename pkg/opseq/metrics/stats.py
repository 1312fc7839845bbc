from collections import Counter
from dataclasses import asdict, dataclass
from typing import Dict, Sequence, Union

from opseq.codecs.base import Codec, Variant
from opseq.codecs.registry import get_codec
from opseq.core.errors import DecodeError
from opseq.core.tokens import JB, JF, NO_OPS, NO_SRC, NO_TGT, SM, Token, as_tokens


@dataclass(frozen=True)
class OpSeqStats:
    """Token counters and the reordering distance of one operation sequence."""

    count_sm: int = 0
    count_jb: int = 0
    count_jf: int = 0
    count_no_ops: int = 0
    reorder_distance: int = 0
    tuples: int = 0
    targets: int = 0
    no_src: int = 0
    no_tgt: int = 0

    def __add__(self, other: "OpSeqStats") -> "OpSeqStats":
        mine, theirs = asdict(self), asdict(other)
        return OpSeqStats(**{key: mine[key] + theirs[key] for key in mine})

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def opseq_stats(stream: Sequence[Union[Token, str]],
                codec: Union[Codec, Variant, str] = Variant.RELATIVE) -> OpSeqStats:
    """
    Count operation tokens and measure how much a stream reorders.

    The reorder distance sums |final position - emission rank| over the
    target words of the decoded translation.

    Args:
        stream: A complete, valid stream
        codec: Codec or variant of the stream

    Returns:
        The OpSeqStats

    Raises:
        DecodeError: if the stream is rejected by the validator
    """
    codec = codec if isinstance(codec, Codec) else get_codec(codec)
    result = codec.validate(stream)
    if not result.accepted:
        raise DecodeError(f"Invalid stream: {result.message}", result.error_index)
    tokens = as_tokens(stream)
    counts = Counter(t.surface for t in tokens)
    restoration = codec.decode(tokens)
    ranks = restoration.emission_ranks
    return OpSeqStats(
        count_sm=counts[SM],
        count_jb=counts[JB],
        count_jf=counts[JF],
        count_no_ops=counts[NO_OPS],
        reorder_distance=sum(abs(position - rank) for position, rank in enumerate(ranks, start=1)),
        tuples=len(result.tuple_spans),
        targets=len(ranks),
        no_src=counts[NO_SRC],
        no_tgt=counts[NO_TGT],
    )
