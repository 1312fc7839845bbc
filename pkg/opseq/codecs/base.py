from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

from opseq.core.errors import DecodeError, TokenError
from opseq.core.tokens import Token, as_tokens
from opseq.core.types import TupleSequence, Word

TraceSink = Callable[[str], None]


class Variant(str, Enum):
    ABSOLUTE = "abs"
    RELATIVE = "rel"


class Step(str, Enum):
    """What a single pushed token did to an interpreter."""

    PENDING = "pending"
    TUPLE = "tuple-completed"
    END = "stream-ended"


@dataclass(frozen=True)
class ParseResult:
    """Outcome of a grammar check: accepted with tuple spans, or the first error."""

    accepted: bool
    tuple_spans: Tuple[Tuple[int, int], ...] = ()
    error_index: Optional[int] = None
    expected: Tuple[str, ...] = ()
    message: str = ""

    @classmethod
    def accept(cls, spans: Sequence[Tuple[int, int]]) -> "ParseResult":
        return cls(True, tuple(spans))

    @classmethod
    def reject(cls, index: int, expected: Sequence[str], message: str) -> "ParseResult":
        return cls(False, (), index, tuple(expected), message)

    def __bool__(self) -> bool:
        return self.accepted

    def describe(self) -> str:
        if self.accepted:
            return f"accepted ({len(self.tuple_spans)} tuples)"
        expected = ", ".join(self.expected) if self.expected else "nothing"
        return f"rejected at token {self.error_index}: {self.message} (expected {expected})"


@dataclass(frozen=True)
class Restoration:
    """
    Transcription and translation restored from an operation sequence.

    Unpacks as (transcription, translation).
    """

    transcription: Tuple[Word, ...]
    translation: Tuple[Word, ...]
    alignment: FrozenSet[Tuple[int, int]] = frozenset()
    emission_ranks: Tuple[int, ...] = ()
    complete: bool = True
    tail: Tuple[Token, ...] = ()
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def __iter__(self) -> Iterator[Tuple[Word, ...]]:
        yield self.transcription
        yield self.translation

    @property
    def source_text(self) -> str:
        return " ".join(w.surface for w in self.transcription)

    @property
    def target_text(self) -> str:
        return " ".join(w.surface for w in self.translation)


class Interpreter(ABC):
    """
    Incremental restorer of one operation sequence.

    Tokens are pushed one at a time into a FIFO queue; when a group or tuple
    boundary arrives the queued tuple is executed against the buffers.
    """

    def __init__(self, trace: Optional[TraceSink] = None):
        self.trace = trace
        self.ended = False
        self.tuples_done = 0
        self.warnings: List[str] = []

    @abstractmethod
    def push(self, token: Token, token_index: int) -> Step:
        """
        Enqueue one token and execute the pending tuple on a boundary.

        Args:
            token: The next token of the stream
            token_index: Its index in the stream (for error messages)

        Returns:
            Step.TUPLE when a tuple was executed, Step.END on [EOS], else Step.PENDING

        Raises:
            DecodeError: if the queued tokens do not form a tuple
        """
        pass

    @abstractmethod
    def pending(self) -> Tuple[Token, ...]:
        """Return the queued tokens that have not been executed yet."""
        pass

    @abstractmethod
    def transcription(self) -> Tuple[Word, ...]:
        """Return the current transcription S."""
        pass

    @abstractmethod
    def translation(self) -> Tuple[Word, ...]:
        """Return T with markers and unwritten cells removed."""
        pass

    @abstractmethod
    def buffer_view(self) -> Tuple[str, ...]:
        """Return T cell by cell, markers as "*" and unwritten cells as "_"."""
        pass

    @abstractmethod
    def alignment(self) -> FrozenSet[Tuple[int, int]]:
        """Return 1-based (source word, final target word) links restored so far."""
        pass

    @abstractmethod
    def emission_ranks(self) -> Tuple[int, ...]:
        """For each word of translation(), the 1-based order in which it was emitted."""
        pass

    def restoration(self) -> Restoration:
        return Restoration(
            transcription=self.transcription(),
            translation=self.translation(),
            alignment=self.alignment(),
            emission_ranks=self.emission_ranks(),
            complete=self.ended,
            tail=self.pending(),
            warnings=tuple(self.warnings),
        )

    def _emit_trace(self, line: str) -> None:
        if self.trace is not None:
            self.trace(line)


class Recognizer(ABC):
    """
    Incremental grammar check of one stream.

    Tokens are pushed one at a time. The first token that cannot continue a
    valid stream is kept as the rejection; later pushes return it unchanged.
    """

    def __init__(self):
        self.spans: List[Tuple[int, int]] = []
        self.rejection: Optional[ParseResult] = None
        self.fed = 0

    @property
    @abstractmethod
    def expected(self) -> Tuple[str, ...]:
        """Return what may come next in the current state."""
        pass

    @property
    @abstractmethod
    def complete(self) -> bool:
        """Return True once [EOS] has been accepted."""
        pass

    @abstractmethod
    def _step(self, token: Token, index: int) -> Optional[str]:
        """Advance on one token; return an error message if it cannot continue the stream."""
        pass

    def push(self, token: Token) -> Optional[ParseResult]:
        """
        Check the next token.

        Returns:
            None while the stream is still a valid prefix, else the rejection
        """
        if self.rejection is not None:
            return self.rejection
        index = self.fed
        self.fed += 1
        expected = self.expected
        message = self._step(token, index)
        if message is not None:
            self.rejection = ParseResult.reject(index, expected, message)
        return self.rejection

    def finish(self) -> ParseResult:
        if self.rejection is not None:
            return self.rejection
        if not self.complete:
            return ParseResult.reject(self.fed, self.expected, "missing [EOS]")
        return ParseResult.accept(self.spans)


class Codec(ABC):
    """
    Base class for an operation-sequence serialization.

    A codec compiles TupleSequences into token streams, checks streams
    against its grammar and restores transcription and translation.
    """

    @property
    @abstractmethod
    def variant(self) -> Variant:
        """Return the variant this codec implements."""
        pass

    @abstractmethod
    def encode(self, tuples: TupleSequence) -> Tuple[Token, ...]:
        """
        Compile a TupleSequence into a stream terminated by [EOS].

        Args:
            tuples: A non-empty, well-formed TupleSequence

        Returns:
            The token stream
        """
        pass

    @abstractmethod
    def recognizer(self) -> Recognizer:
        """Return a fresh incremental grammar check for this variant."""
        pass

    def validate(self, tokens: Sequence[Union[Token, str]]) -> ParseResult:
        """
        Check a token sequence against the grammar. Never raises.

        Args:
            tokens: Tokens or surfaces

        Returns:
            The ParseResult
        """
        stream = coerce_for_validation(tokens)
        if isinstance(stream, ParseResult):
            return stream
        recognizer = self.recognizer()
        for token in stream:
            if recognizer.push(token) is not None:
                break
        return recognizer.finish()

    @abstractmethod
    def interpreter(self, trace: Optional[TraceSink] = None) -> Interpreter:
        """Return a fresh incremental interpreter."""
        pass

    def decode(self, tokens: Sequence[Union[Token, str]], trace: Optional[TraceSink] = None) -> Restoration:
        """
        Restore transcription and translation from a stream.

        A stream without [EOS] is restored up to its last complete tuple and
        the returned Restoration is marked incomplete with the unprocessed tail.

        Raises:
            DecodeError: if the stream is malformed or a token follows [EOS]
        """
        try:
            stream = as_tokens(tokens)
        except TokenError as e:
            raise DecodeError(str(e), e.token_index) from None
        interp = self.interpreter(trace)
        for index, token in enumerate(stream):
            if interp.ended:
                raise DecodeError(f"Token {token.surface} after [EOS]", index)
            interp.push(token, index)
        return interp.restoration()


def coerce_for_validation(tokens: Sequence[Union[Token, str]]) -> Union[Tuple[Token, ...], ParseResult]:
    """Convert surfaces to Tokens, or return the rejection for the first illegal surface."""
    try:
        return as_tokens(tokens)
    except TokenError as e:
        return ParseResult.reject(e.token_index or 0, (), e.reason)
