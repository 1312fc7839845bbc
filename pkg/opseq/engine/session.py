import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

from opseq.codecs.base import Codec, Interpreter, Recognizer, Restoration, Step, Variant
from opseq.codecs.registry import get_codec
from opseq.core.errors import DecodeError, SessionError, TokenError
from opseq.core.tokens import Token
from opseq.metrics.latency import LatencyTrace

logger = logging.getLogger(__name__)


class EventKind(str, Enum):
    NONE = "none"
    TUPLE = "tuple-completed"
    END = "stream-ended"
    ERROR = "error"


_EVENT_OF_STEP = {Step.PENDING: EventKind.NONE, Step.TUPLE: EventKind.TUPLE, Step.END: EventKind.END}


@dataclass(frozen=True)
class FeedEvent:
    """What feeding one token did."""

    kind: EventKind
    token_index: int
    error: Optional[DecodeError] = None


@dataclass(frozen=True)
class Snapshot:
    """
    Interpreter state right after a tuple (or absolute group) completed.

    buffer holds T cell by cell, markers as "*" and unwritten cells as "_";
    translation is the display form with both elided.
    """

    index: int
    transcription: Tuple[str, ...]
    translation: Tuple[str, ...]
    buffer: Tuple[str, ...]
    timestamp: Optional[int] = None

    @property
    def source_text(self) -> str:
        return " ".join(self.transcription)

    @property
    def target_text(self) -> str:
        return " ".join(self.translation)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "S": self.source_text,
            "T": self.target_text,
            "buffer": list(self.buffer),
            "timestamp": self.timestamp,
        }


class StreamSession:
    """
    Token-at-a-time interpretation of one operation sequence.

    Every token is checked against the grammar of the variant before it is
    queued, so a token that cannot continue the stream fails where it is fed.
    Every completed tuple appends a Snapshot. An error poisons the session: it
    is reported once as an error event and every later feed raises SessionError.
    """

    def __init__(self, codec: Union[Codec, Variant, str] = Variant.RELATIVE):
        """
        Initialize a session.

        Args:
            codec: A codec instance, or the variant whose default codec to use
        """
        self.codec = codec if isinstance(codec, Codec) else get_codec(codec)
        self.interpreter: Interpreter = self.codec.interpreter()
        self.recognizer: Recognizer = self.codec.recognizer()
        self.snapshots: List[Snapshot] = []
        self.events: List[FeedEvent] = []
        self.error: Optional[DecodeError] = None
        self.fed = 0

    @property
    def variant(self) -> Variant:
        return self.codec.variant

    @property
    def ended(self) -> bool:
        return self.interpreter.ended

    @property
    def poisoned(self) -> bool:
        return self.error is not None

    def feed(self, token: Union[Token, str], timestamp: Optional[int] = None) -> FeedEvent:
        """
        Feed the next token of the stream.

        Args:
            token: A Token or its surface
            timestamp: Optional emission time in milliseconds

        Returns:
            The FeedEvent; decode failures come back as an error event

        Raises:
            SessionError: if the session already ended or is poisoned
        """
        if self.poisoned:
            raise SessionError(f"Session is poisoned by an earlier error: {self.error}")
        if self.ended:
            raise SessionError("Session already ended")

        index = self.fed
        self.fed += 1
        try:
            if not isinstance(token, Token):
                token = Token.parse(token, index)
            rejection = self.recognizer.push(token)
            if rejection is not None:
                raise DecodeError(rejection.message, index)
            step = self.interpreter.push(token, index)
        except TokenError as e:
            return self._fail(DecodeError(e.reason, index), index)
        except DecodeError as e:
            return self._fail(e, index)

        if step is Step.TUPLE:
            self._snapshot(index, timestamp)
        event = FeedEvent(_EVENT_OF_STEP[step], index)
        self.events.append(event)
        return event

    def feed_all(self, tokens: Sequence[Union[Token, str]],
                 timestamps: Optional[Sequence[int]] = None) -> "StreamSession":
        """
        Feed tokens in order, stopping at the first failure.

        Raises:
            SessionError: if the timestamp count does not match the token count
            DecodeError: the first decode failure, carrying its token index
        """
        if timestamps is not None and len(timestamps) != len(tokens):
            raise SessionError(f"{len(timestamps)} timestamps given for {len(tokens)} tokens")
        for i, token in enumerate(tokens):
            event = self.feed(token, timestamps[i] if timestamps is not None else None)
            if event.kind is EventKind.ERROR:
                raise event.error
            if self.ended and i + 1 < len(tokens):
                raise DecodeError(f"Token {tokens[i + 1]} after [EOS]", i + 1)
        return self

    def _fail(self, error: DecodeError, index: int) -> FeedEvent:
        logger.debug("Session poisoned at token %d: %s", index, error)
        self.error = error
        event = FeedEvent(EventKind.ERROR, index, error)
        self.events.append(event)
        return event

    def _snapshot(self, index: int, timestamp: Optional[int]) -> None:
        self.snapshots.append(Snapshot(
            index=index,
            transcription=tuple(w.surface for w in self.interpreter.transcription()),
            translation=tuple(w.surface for w in self.interpreter.translation()),
            buffer=self.interpreter.buffer_view(),
            timestamp=timestamp,
        ))

    def partial_hypotheses(self) -> List[Tuple[int, str]]:
        """Return (token index, display translation) for every snapshot."""
        return [(s.index, s.target_text) for s in self.snapshots]

    def final(self) -> Restoration:
        """Return the restoration of everything fed so far."""
        return self.interpreter.restoration()

    def tail(self) -> Tuple[Token, ...]:
        """Tokens fed after the last completed tuple."""
        return self.interpreter.pending()

    def latency_trace(self) -> LatencyTrace:
        """
        Build the emission delays of the final translation.

        d_i is the number of source words transcribed at the first snapshot
        where target words 1..i are all in place.

        Raises:
            SessionError: if the session did not end cleanly
        """
        if not self.ended or self.poisoned:
            raise SessionError("Latency needs a session fed up to [EOS]")
        restoration = self.final()
        ranks = restoration.emission_ranks
        src_len, tgt_len = len(restoration.transcription), len(ranks)
        if tgt_len == 0:
            raise SessionError("Latency needs at least one target word")

        # emission rank -> transcription length when it was emitted
        emitted_at = {}
        for snapshot in self.snapshots:
            for rank in range(len(emitted_at) + 1, len(snapshot.translation) + 1):
                emitted_at[rank] = len(snapshot.transcription)
        delays = []
        latest = 0
        for rank in ranks:
            latest = max(latest, emitted_at.get(rank, src_len))
            delays.append(latest)
        return LatencyTrace(delays=delays, src_len=src_len, tgt_len=tgt_len)


def feed(session: StreamSession, token: Union[Token, str], timestamp: Optional[int] = None) -> FeedEvent:
    return session.feed(token, timestamp)


def partial_hypotheses(session: StreamSession) -> List[Tuple[int, str]]:
    return session.partial_hypotheses()


def replay(stream: Union[str, Sequence[Union[Token, str]]], timestamps: Optional[Sequence[int]] = None,
           codec: Union[Codec, Variant, str] = Variant.RELATIVE) -> StreamSession:
    """
    Feed a whole stream into a fresh session.

    Args:
        stream: A serialized line or a token sequence
        timestamps: Optional per-token emission times in milliseconds
        codec: Codec or variant of the stream

    Returns:
        The fed session

    Raises:
        SessionError: if the timestamp count does not match the token count
        DecodeError: the first decode failure, carrying its token index
    """
    tokens = stream.split() if isinstance(stream, str) else list(stream)
    return StreamSession(codec).feed_all(tokens, timestamps)
