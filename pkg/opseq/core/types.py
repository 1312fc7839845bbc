from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from opseq.core.tokens import (
    T_NEG,
    T_NO_SRC,
    T_NO_TGT,
    Token,
    check_piece,
    group_words,
    position_token,
)


@dataclass(frozen=True)
class Word:
    """
    A word as a non-empty sequence of raw sub-word pieces.

    The first piece carries the word-boundary flag; in serialized form every
    following piece is written with the continuation prefix.
    """

    pieces: Tuple[str, ...]

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("A Word needs at least one piece")
        for piece in self.pieces:
            check_piece(piece)

    @classmethod
    def of(cls, *pieces: str) -> "Word":
        return cls(tuple(pieces))

    @classmethod
    def from_tokens(cls, tokens: Sequence[Token]) -> "Word":
        if not tokens or not tokens[0].is_word_start or any(not t.is_continuation for t in tokens[1:]):
            raise ValueError(f"Not a single word: {' '.join(t.surface for t in tokens)}")
        return cls(tuple(t.raw for t in tokens))

    @property
    def surface(self) -> str:
        """The reconstructed surface word (pieces joined at the boundary)."""
        return "".join(self.pieces)

    def tokens(self) -> Tuple[Token, ...]:
        return tuple(Token.piece(p, continuation=i > 0) for i, p in enumerate(self.pieces))

    def __str__(self) -> str:
        return self.surface


def words_from_tokens(tokens: Sequence[Token]) -> Tuple[Word, ...]:
    return tuple(Word.from_tokens(group) for group in group_words(tokens))


def words_from_line(line: str, segmented: bool = False) -> Tuple[Word, ...]:
    """
    Split a text line into Words.

    Args:
        line: Whitespace-separated text
        segmented: If True, pieces ending in "@@" continue into the next piece
            (subword-nmt convention)

    Returns:
        The words of the line
    """
    if not segmented:
        return tuple(Word.of(w) for w in line.split())
    words: List[Word] = []
    current: List[str] = []
    for piece in line.split():
        if piece.endswith("@@") and len(piece) > 2:
            current.append(piece[:-2])
            continue
        current.append(piece)
        words.append(Word(tuple(current)))
        current = []
    if current:
        words.append(Word(tuple(current)))
    return tuple(words)


def words_to_line(words: Iterable[Word]) -> str:
    return " ".join(w.surface for w in words)


@dataclass(frozen=True)
class AlignedSentencePair:
    """Source words, target words and 1-based word alignment links (i, j)."""

    src: Tuple[Word, ...]
    tgt: Tuple[Word, ...]
    links: FrozenSet[Tuple[int, int]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "src", tuple(self.src))
        object.__setattr__(self, "tgt", tuple(self.tgt))
        object.__setattr__(self, "links", frozenset(self.links))
        for i, j in self.links:
            if not (1 <= i <= len(self.src) and 1 <= j <= len(self.tgt)):
                raise ValueError(
                    f"Link ({i}, {j}) is out of bounds for {len(self.src)} source "
                    f"and {len(self.tgt)} target words"
                )

    @classmethod
    def from_text(cls, src: str, tgt: str, links: Iterable[Tuple[int, int]] = (),
                  segmented: bool = False) -> "AlignedSentencePair":
        return cls(words_from_line(src, segmented), words_from_line(tgt, segmented), frozenset(links))


@dataclass(frozen=True)
class TargetEntry:
    """A target word with its final 1-based position, or [NO_TGT] with no position."""

    word: Optional[Word]
    position: Optional[int] = None

    def __post_init__(self):
        if self.word is None and self.position is not None:
            raise ValueError("A [NO_TGT] entry has no final position")
        if self.word is not None and (self.position is None or self.position < 1):
            raise ValueError(f"Target word {self.word} needs a final position >= 1")

    @property
    def is_null(self) -> bool:
        return self.word is None


NULL_TARGET = TargetEntry(None, None)


@dataclass(frozen=True)
class OperationTuple:
    """One source slot (a Word, or None for [NO_SRC]) and its aligned target entries."""

    source: Optional[Word]
    targets: Tuple[TargetEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise ValueError("An operation tuple needs at least one target entry")
        if any(t.is_null for t in self.targets) and len(self.targets) != 1:
            raise ValueError("A [NO_TGT] entry must be the only target entry of its tuple")
        if self.source is None and any(t.is_null for t in self.targets):
            raise ValueError("A tuple cannot pair [NO_SRC] with [NO_TGT]")


@dataclass(frozen=True)
class TupleSequence:
    """The ordered operation tuples shared by both serializations."""

    tuples: Tuple[OperationTuple, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "tuples", tuple(self.tuples))
        positions = sorted(t.position for tup in self.tuples for t in tup.targets if not t.is_null)
        if positions != list(range(1, len(positions) + 1)):
            raise ValueError(f"Final positions {positions} are not a permutation of 1..{len(positions)}")

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    @property
    def target_length(self) -> int:
        return sum(1 for tup in self.tuples for t in tup.targets if not t.is_null)

    def source_words(self) -> Tuple[Word, ...]:
        """The transcription: real source slots in stream order."""
        return tuple(tup.source for tup in self.tuples if tup.source is not None)

    def target_words(self) -> Tuple[Word, ...]:
        """The translation: real target words sorted by final position."""
        entries = [t for tup in self.tuples for t in tup.targets if not t.is_null]
        return tuple(t.word for t in sorted(entries, key=lambda t: t.position))


def collapse(item: Union[Word, OperationTuple, TupleSequence]) -> Tuple[Token, ...]:
    """
    Flatten a Word, tuple or TupleSequence into its collapsed token stream.

    Each tuple contributes its source slot, then every target entry followed by
    its positioning token ([n] or [-1]). A word followed by a word opens a new
    tuple; a word followed by a positioning token is a target.
    """
    if isinstance(item, Word):
        return item.tokens()
    if isinstance(item, OperationTuple):
        tokens: List[Token] = list(item.source.tokens() if item.source is not None else (T_NO_SRC,))
        for entry in item.targets:
            if entry.is_null:
                tokens.extend((T_NO_TGT, T_NEG))
            else:
                tokens.extend(entry.word.tokens())
                tokens.append(position_token(entry.position))
        return tuple(tokens)
    if isinstance(item, TupleSequence):
        return tuple(token for tup in item.tuples for token in collapse(tup))
    raise TypeError(f"Cannot collapse {type(item).__name__}")
