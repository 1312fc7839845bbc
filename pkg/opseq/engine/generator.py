from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from opseq.codecs.base import Variant
from opseq.core.tokens import (
    BL,
    EOP,
    EOS,
    T_BL,
    T_EOP,
    T_EOS,
    Token,
)
from opseq.core.types import AlignedSentencePair, Word

_LETTERS = np.array(list("abcdefghijklmnopqrstuvwxyz"))

CORRUPTIONS = ("drop-eos", "drop-separator", "drop-word-start", "drop-op", "insert-foreign", "insert-eos")


class RandomPairGenerator:
    """
    Seeded generator of random aligned sentence pairs.

    Source words get a fertility in 0..max_fertility (0 with probability
    unaligned_prob), extra unaligned target words are sprinkled in, and the
    target side is shuffled unless monotone is set.
    """

    def __init__(self, seed: Optional[int] = None, max_src_len: int = 20, max_fertility: int = 3,
                 unaligned_prob: float = 0.1, split_prob: float = 0.3, extra_link_prob: float = 0.1):
        """
        Initialize the generator.

        Args:
            seed: Random seed for reproducibility
            max_src_len: Largest source length (lengths are drawn from 1..max_src_len)
            max_fertility: Largest number of target words per source word
            unaligned_prob: Probability of an unaligned source or target word
            split_prob: Probability that a word is split into two pieces
            extra_link_prob: Probability of an additional many-to-many link per pair
        """
        self.rng = np.random.default_rng(seed)
        self.max_src_len = max_src_len
        self.max_fertility = max_fertility
        self.unaligned_prob = unaligned_prob
        self.split_prob = split_prob
        self.extra_link_prob = extra_link_prob

    def word(self) -> Word:
        text = "".join(self.rng.choice(_LETTERS, size=int(self.rng.integers(1, 7))))
        if len(text) > 1 and self.rng.random() < self.split_prob:
            cut = int(self.rng.integers(1, len(text)))
            return Word.of(text[:cut], text[cut:])
        return Word.of(text)

    def pair(self, monotone: bool = False) -> AlignedSentencePair:
        """
        Draw one pair.

        Args:
            monotone: Keep the target side in emission order (no reordering and
                no extra links)

        Returns:
            The AlignedSentencePair with 1-based links
        """
        src_len = int(self.rng.integers(1, self.max_src_len + 1))
        # owner source index (or None) of every target word, in emission order
        owners: List[Optional[int]] = []
        for i in range(1, src_len + 1):
            if self.rng.random() < self.unaligned_prob:
                fertility = 0
            else:
                fertility = int(self.rng.integers(1, self.max_fertility + 1))
            owners.extend([i] * fertility)
            while self.rng.random() < self.unaligned_prob:
                owners.append(None)
        if not owners:
            owners.append(None)

        tgt_len = len(owners)
        order = np.arange(tgt_len) if monotone else self.rng.permutation(tgt_len)
        positions = [int(p) + 1 for p in order]
        links = {(owner, positions[k]) for k, owner in enumerate(owners) if owner is not None}
        if not monotone and links and self.rng.random() < self.extra_link_prob:
            links.add((int(self.rng.integers(1, src_len + 1)), int(self.rng.integers(1, tgt_len + 1))))

        src = tuple(self.word() for _ in range(src_len))
        tgt = tuple(self.word() for _ in range(tgt_len))
        return AlignedSentencePair(src, tgt, frozenset(links))

    def pairs(self, count: int, monotone: bool = False) -> List[AlignedSentencePair]:
        return [self.pair(monotone) for _ in range(count)]

    def corrupt(self, stream: Sequence[Token], variant: Union[Variant, str],
                kind: Optional[str] = None) -> Tuple[Tuple[Token, ...], str]:
        """
        Apply one structural corruption that breaks the grammar of the variant.

        Args:
            stream: A valid, complete stream
            variant: Its variant
            kind: One of CORRUPTIONS, drawn at random when omitted

        Returns:
            The corrupted stream and the name of the corruption applied
        """
        variant = Variant(variant)
        kind = kind or str(self.rng.choice(CORRUPTIONS))
        tokens = list(stream)
        if kind == "drop-eos":
            tokens = [t for t in tokens if t.surface != EOS]
        elif kind == "drop-separator":
            separator = BL if variant is Variant.ABSOLUTE else EOP
            tokens.pop(self._pick([i for i, t in enumerate(tokens) if t.surface == separator]))
        elif kind == "drop-word-start":
            tokens.pop(self._pick(self._target_starts(tokens, variant)))
        elif kind == "drop-op":
            tokens.pop(self._pick(self._sole_ops(tokens, variant)))
        elif kind == "insert-foreign":
            foreign = T_EOP if variant is Variant.ABSOLUTE else T_BL
            tokens.insert(int(self.rng.integers(0, len(tokens) + 1)), foreign)
        elif kind == "insert-eos":
            tokens.insert(int(self.rng.integers(0, len(tokens) - 1)), T_EOS)
        else:
            raise ValueError(f"Unknown corruption: {kind}")
        return tuple(tokens), kind

    def _pick(self, candidates: List[int]) -> int:
        if not candidates:
            raise ValueError("Stream has no place for this corruption")
        return candidates[int(self.rng.integers(0, len(candidates)))]

    @staticmethod
    def _target_starts(tokens: Sequence[Token], variant: Variant) -> List[int]:
        if variant is Variant.RELATIVE:
            # the dropped word must leave a stray continuation piece or an
            # operation list directly before [EOP]
            return [
                i for i, t in enumerate(tokens)
                if t.is_word_start and tokens[i - 1].is_op
                and (tokens[i + 1].is_continuation or tokens[i + 1].surface == EOP)
            ]
        starts = []
        for i, token in enumerate(tokens):
            if not token.is_word_start:
                continue
            end = i + 1
            while tokens[end].is_continuation:
                end += 1
            if tokens[end].is_position:
                starts.append(i)
        return starts

    @staticmethod
    def _sole_ops(tokens: Sequence[Token], variant: Variant) -> List[int]:
        if variant is Variant.ABSOLUTE:
            return [i for i, t in enumerate(tokens) if t.is_position]
        return [
            i for i, t in enumerate(tokens)
            if t.is_op and not tokens[i - 1].is_op and not tokens[i + 1].is_op
        ]
