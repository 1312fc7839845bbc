from typing import Dict, FrozenSet, List, Tuple

from opseq.core.types import (
    NULL_TARGET,
    AlignedSentencePair,
    OperationTuple,
    TargetEntry,
    TupleSequence,
)

# Anchor key for [NO_SRC] tuples placed before every source tuple
_START = 0


def resolve_links(pair: AlignedSentencePair) -> Dict[int, int]:
    """
    Map every aligned target position to exactly one source position.

    A target word linked to several source words keeps the leftmost one.
    """
    owner: Dict[int, int] = {}
    for i, j in pair.links:
        if j not in owner or i < owner[j]:
            owner[j] = i
    return owner


def build_tuples(pair: AlignedSentencePair) -> TupleSequence:
    """
    Build the operation tuples of an aligned sentence pair.

    Each source word yields one tuple holding its aligned target words in
    target order, or a single [NO_TGT] entry. Each unaligned target word at
    position p becomes a [NO_SRC] tuple placed right after the tuple holding
    target p - 1 (chaining through consecutive unaligned words), or at the
    start of the stream when p = 1.

    Args:
        pair: The aligned sentence pair

    Returns:
        The TupleSequence
    """
    owner = resolve_links(pair)
    src_targets: Dict[int, List[int]] = {i: [] for i in range(1, len(pair.src) + 1)}
    for j in sorted(owner):
        src_targets[owner[j]].append(j)

    # anchor (source position, or _START) of each unaligned target word
    anchor_of: Dict[int, int] = {}
    attached: Dict[int, List[int]] = {}
    for p in range(1, len(pair.tgt) + 1):
        if p in owner:
            continue
        if p == 1:
            anchor = _START
        elif p - 1 in owner:
            anchor = owner[p - 1]
        else:
            anchor = anchor_of[p - 1]
        anchor_of[p] = anchor
        attached.setdefault(anchor, []).append(p)

    def no_src(p: int) -> OperationTuple:
        return OperationTuple(None, (TargetEntry(pair.tgt[p - 1], p),))

    tuples: List[OperationTuple] = [no_src(p) for p in attached.get(_START, [])]
    for i, word in enumerate(pair.src, start=1):
        targets = src_targets[i]
        entries = tuple(TargetEntry(pair.tgt[j - 1], j) for j in targets) or (NULL_TARGET,)
        tuples.append(OperationTuple(word, entries))
        tuples.extend(no_src(p) for p in attached.get(i, []))
    return TupleSequence(tuple(tuples))


def tuple_alignment(tuples: TupleSequence) -> FrozenSet[Tuple[int, int]]:
    """The one-to-many alignment a TupleSequence encodes, as 1-based links."""
    links = set()
    src_pos = 0
    for tup in tuples:
        if tup.source is None:
            continue
        src_pos += 1
        links.update((src_pos, t.position) for t in tup.targets if not t.is_null)
    return frozenset(links)
