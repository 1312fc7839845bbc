import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from opseq.core.errors import TokenError


class TokenKind(str, Enum):
    WORD_PIECE = "word-piece"
    SPECIAL = "special"


BL = "[BL]"
EOS = "[EOS]"
EOP = "[EOP]"
NO_SRC = "[NO_SRC]"
NO_TGT = "[NO_TGT]"
NO_OPS = "[NO_OPS]"
SM = "[SM]"
JF = "[JF]"
JB = "[JB]"
NEG_POSITION = "[-1]"

# Closed set of special tokens; absolute positions [n] are recognised separately.
SPECIAL_SURFACES = frozenset({BL, EOS, EOP, NO_SRC, NO_TGT, NO_OPS, SM, JF, JB, NEG_POSITION})

# Relative-variant operation tokens.
OP_SURFACES = frozenset({SM, JF, JB, NO_OPS})

# Prefix carried by every piece of a word except the first.
CONTINUATION_PREFIX = "##"

_POSITION_RE = re.compile(r"^\[([1-9][0-9]*)\]$")
_BRACKETED_RE = re.compile(r"^\[.*\]$")


def position_of(surface: str) -> Optional[int]:
    """Return n for a position surface "[n]" (n >= 1), otherwise None."""
    match = _POSITION_RE.match(surface)
    return int(match.group(1)) if match else None


def check_piece(piece: str) -> None:
    """
    Check that a raw (unprefixed) word piece is legal.

    Raises:
        TokenError: if the piece is empty, contains whitespace, starts with the
            continuation prefix or is a bracketed (reserved) form
    """
    if not piece:
        raise TokenError(piece, "empty word piece")
    if any(ch.isspace() for ch in piece):
        raise TokenError(piece, "word piece contains whitespace")
    if piece.startswith(CONTINUATION_PREFIX):
        raise TokenError(piece, f"word piece may not start with {CONTINUATION_PREFIX!r}")
    if _BRACKETED_RE.match(piece):
        raise TokenError(piece, "bracketed forms are reserved for special tokens")


@dataclass(frozen=True)
class Token:
    """One surface unit of a serialized operation sequence."""

    surface: str
    kind: TokenKind

    @classmethod
    def parse(cls, surface: str, token_index: Optional[int] = None) -> "Token":
        """
        Classify a serialized surface.

        Args:
            surface: The surface form as it appears in a stream
            token_index: Optional position used in error messages

        Returns:
            A special token or a word-piece token

        Raises:
            TokenError: if the surface is a bracketed form outside the reserved set
                or an illegal word piece
        """
        if surface in SPECIAL_SURFACES or position_of(surface) is not None:
            return cls(surface, TokenKind.SPECIAL)
        raw = surface[len(CONTINUATION_PREFIX):] if surface.startswith(CONTINUATION_PREFIX) else surface
        try:
            check_piece(raw)
        except TokenError as e:
            raise TokenError(surface, e.reason, token_index) from None
        return cls(surface, TokenKind.WORD_PIECE)

    @classmethod
    def special(cls, surface: str) -> "Token":
        if surface not in SPECIAL_SURFACES and position_of(surface) is None:
            raise TokenError(surface, "not a special token")
        return cls(surface, TokenKind.SPECIAL)

    @classmethod
    def piece(cls, raw: str, continuation: bool = False) -> "Token":
        check_piece(raw)
        return cls(CONTINUATION_PREFIX + raw if continuation else raw, TokenKind.WORD_PIECE)

    @property
    def is_special(self) -> bool:
        return self.kind is TokenKind.SPECIAL

    @property
    def is_word_start(self) -> bool:
        """True for the first piece of a word (the piece carrying the boundary flag)."""
        return self.kind is TokenKind.WORD_PIECE and not self.surface.startswith(CONTINUATION_PREFIX)

    @property
    def is_continuation(self) -> bool:
        return self.kind is TokenKind.WORD_PIECE and self.surface.startswith(CONTINUATION_PREFIX)

    @property
    def raw(self) -> str:
        """The piece text without the continuation prefix."""
        return self.surface[len(CONTINUATION_PREFIX):] if self.is_continuation else self.surface

    @property
    def position(self) -> Optional[int]:
        return position_of(self.surface) if self.is_special else None

    @property
    def is_position(self) -> bool:
        """True for [n] and [-1]."""
        return self.surface == NEG_POSITION or self.position is not None

    @property
    def is_op(self) -> bool:
        return self.surface in OP_SURFACES

    def __str__(self) -> str:
        return self.surface


def is_special(token: Union[Token, str]) -> bool:
    """True iff the surface is in the reserved set (closed set plus [n], n >= 1)."""
    surface = token.surface if isinstance(token, Token) else token
    return surface in SPECIAL_SURFACES or position_of(surface) is not None


def position_token(n: int) -> Token:
    if n < 1:
        raise ValueError(f"Position must be >= 1, got {n}")
    return Token(f"[{n}]", TokenKind.SPECIAL)


# Shared instances for the closed set
T_BL = Token(BL, TokenKind.SPECIAL)
T_EOS = Token(EOS, TokenKind.SPECIAL)
T_EOP = Token(EOP, TokenKind.SPECIAL)
T_NO_SRC = Token(NO_SRC, TokenKind.SPECIAL)
T_NO_TGT = Token(NO_TGT, TokenKind.SPECIAL)
T_NO_OPS = Token(NO_OPS, TokenKind.SPECIAL)
T_SM = Token(SM, TokenKind.SPECIAL)
T_JF = Token(JF, TokenKind.SPECIAL)
T_JB = Token(JB, TokenKind.SPECIAL)
T_NEG = Token(NEG_POSITION, TokenKind.SPECIAL)


def tokenize(line: str) -> Tuple[Token, ...]:
    """
    Split a serialized stream line into tokens.

    Raises:
        TokenError: carrying the index of the first illegal surface
    """
    return tuple(Token.parse(surface, i) for i, surface in enumerate(line.split()))


def as_tokens(tokens: Iterable[Union[Token, str]]) -> Tuple[Token, ...]:
    """Coerce a mix of Tokens and surfaces into Tokens."""
    return tuple(t if isinstance(t, Token) else Token.parse(t, i) for i, t in enumerate(tokens))


def render(tokens: Sequence[Token]) -> str:
    """Serialize tokens as a space-separated line."""
    return " ".join(t.surface for t in tokens)


def group_words(tokens: Sequence[Token]) -> List[List[Token]]:
    """
    Group word-piece tokens into words using the boundary flag.

    Raises:
        ValueError: if a continuation piece has no preceding word start or a
            special token is present
    """
    words: List[List[Token]] = []
    for token in tokens:
        if token.is_special:
            raise ValueError(f"Special token {token.surface} inside a word sequence")
        if token.is_word_start:
            words.append([token])
        elif not words:
            raise ValueError(f"Continuation piece {token.surface} without a word start")
        else:
            words[-1].append(token)
    return words
