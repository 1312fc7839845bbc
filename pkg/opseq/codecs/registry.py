from typing import Union

from opseq.codecs.absolute import DEFAULT_MAX_POSITION, AbsoluteCodec
from opseq.codecs.base import Codec, Variant
from opseq.codecs.relative import MarkerPolicy, RelativeCodec


def get_codec(variant: Union[Variant, str], max_position: int = DEFAULT_MAX_POSITION,
              marker_policy: Union[MarkerPolicy, str] = MarkerPolicy.LAZY) -> Codec:
    """
    Build the codec for a variant.

    Args:
        variant: "abs" or "rel"
        max_position: Largest position token (absolute variant only)
        marker_policy: Marker placement policy (relative variant only)

    Returns:
        The codec

    Raises:
        ValueError: for an unknown variant
    """
    variant = Variant(variant)
    if variant is Variant.ABSOLUTE:
        return AbsoluteCodec(max_position)
    return RelativeCodec(marker_policy)
