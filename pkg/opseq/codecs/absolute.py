import logging
from enum import Enum
from typing import FrozenSet, List, Optional, Sequence, Tuple, Union

from opseq.codecs.base import (
    Codec,
    Interpreter,
    ParseResult,
    Recognizer,
    Restoration,
    Step,
    TraceSink,
    Variant,
)
from opseq.codecs.buffers import RestoreBuffers
from opseq.core.errors import DecodeError
from opseq.core.tokens import (
    BL,
    EOS,
    NEG_POSITION,
    NO_SRC,
    NO_TGT,
    T_BL,
    T_EOS,
    T_NEG,
    T_NO_SRC,
    T_NO_TGT,
    Token,
    position_token,
)
from opseq.core.types import TupleSequence, Word

logger = logging.getLogger(__name__)

DEFAULT_MAX_POSITION = 512

_WORD = "word"
_CONTINUATION = "continuation piece"
_POSITION = "[n]"


class _State(Enum):
    SRC = "expect source"
    IN_SRC = "in source word"
    BL = "expect [BL]"
    TGT = "expect target"
    IN_TGT = "in target word"
    NEG = "expect [-1]"
    AFTER_OP = "after operation"
    AMBIGUOUS = "in source-or-target word"
    END = "after [EOS]"


_EXPECTED = {
    _State.SRC: (_WORD, NO_SRC, EOS),
    _State.IN_SRC: (_CONTINUATION, BL),
    _State.BL: (BL,),
    _State.TGT: (_WORD, NO_TGT),
    _State.IN_TGT: (_CONTINUATION, _POSITION),
    _State.NEG: (NEG_POSITION,),
    _State.AFTER_OP: (_WORD, NO_SRC, NO_TGT, EOS),
    _State.AMBIGUOUS: (_CONTINUATION, BL, _POSITION),
    _State.END: (),
}


class AbsoluteRecognizer(Recognizer):
    """Grammar state machine of absolute streams, fed one token at a time."""

    def __init__(self, max_position: int = DEFAULT_MAX_POSITION):
        super().__init__()
        self.max_position = max_position
        self.state = _State.SRC
        self._tuple_start: Optional[int] = None
        self._word_start = 0

    @property
    def expected(self) -> Tuple[str, ...]:
        return _EXPECTED[self.state]

    @property
    def complete(self) -> bool:
        return self.state is _State.END

    def _open_tuple(self, index: int) -> None:
        if self._tuple_start is not None:
            self.spans.append((self._tuple_start, index))
        self._tuple_start = index

    def _step(self, token: Token, index: int) -> Optional[str]:
        state = self.state
        surface = token.surface
        if state is _State.END:
            return f"unexpected {surface} after [EOS]"

        if token.is_continuation:
            if state is _State.IN_SRC or state is _State.IN_TGT or state is _State.AMBIGUOUS:
                return None
            return f"continuation piece {surface} without a word start"

        if token.is_word_start:
            if state is _State.SRC:
                self._open_tuple(index)
                self.state = _State.IN_SRC
            elif state is _State.TGT:
                self.state = _State.IN_TGT
            elif state is _State.AFTER_OP:
                self._word_start = index
                self.state = _State.AMBIGUOUS
            elif state is _State.IN_SRC:
                return "source word must be followed by [BL]"
            else:
                return f"unexpected word {surface}"
            return None

        position = token.position
        if position is not None:
            if state is not _State.IN_TGT and state is not _State.AMBIGUOUS:
                return f"position {surface} without a target word"
            if position > self.max_position:
                return f"position {surface} exceeds the maximum of {self.max_position}"
            self.state = _State.AFTER_OP
        elif surface == BL:
            if state is _State.IN_SRC or state is _State.BL:
                self.state = _State.TGT
            elif state is _State.AMBIGUOUS:
                self._open_tuple(self._word_start)
                self.state = _State.TGT
            else:
                return "unexpected [BL]"
        elif surface == NO_SRC:
            if state is not _State.SRC and state is not _State.AFTER_OP:
                return "unexpected [NO_SRC]"
            self._open_tuple(index)
            self.state = _State.BL
        elif surface == NO_TGT:
            if state is not _State.TGT and state is not _State.AFTER_OP:
                return "unexpected [NO_TGT]"
            self.state = _State.NEG
        elif surface == NEG_POSITION:
            if state is not _State.NEG:
                return "[-1] must follow [NO_TGT]"
            self.state = _State.AFTER_OP
        elif surface == EOS:
            if state is not _State.AFTER_OP:
                if state is _State.SRC:
                    return "a stream needs at least one tuple"
                return "incomplete tuple before [EOS]"
            self._open_tuple(index)
            self.state = _State.END
        else:
            return f"{surface} is not part of the absolute grammar"
        return None


class AbsoluteCodec(Codec):
    """
    Absolute positional operation sequences.

    Each tuple is serialized as its source slot, [BL], then every target word
    followed by its final position [n] ([NO_TGT] is followed by [-1]). The
    stream ends with [EOS].
    """

    def __init__(self, max_position: int = DEFAULT_MAX_POSITION):
        """
        Initialize the codec.

        Args:
            max_position: Largest position token accepted by the validator and decoder
        """
        self.max_position = max_position

    @property
    def variant(self) -> Variant:
        return Variant.ABSOLUTE

    def encode(self, tuples: TupleSequence) -> Tuple[Token, ...]:
        if not tuples.tuples:
            raise ValueError("Cannot encode an empty TupleSequence")
        tokens: List[Token] = []
        for tup in tuples:
            tokens.extend(tup.source.tokens() if tup.source is not None else (T_NO_SRC,))
            tokens.append(T_BL)
            for entry in tup.targets:
                if entry.is_null:
                    tokens.extend((T_NO_TGT, T_NEG))
                else:
                    tokens.extend(entry.word.tokens())
                    tokens.append(position_token(entry.position))
        tokens.append(T_EOS)
        return tuple(tokens)

    def recognizer(self) -> AbsoluteRecognizer:
        return AbsoluteRecognizer(self.max_position)

    def interpreter(self, trace: Optional[TraceSink] = None) -> "AbsoluteInterpreter":
        return AbsoluteInterpreter(self.max_position, trace)


class AbsoluteInterpreter(Interpreter):
    """
    Queue-based restoration of absolute positional sequences.

    Tokens wait in Q until a position token arrives; the dequeued group is
    "src [BL] tgt [n]" (opening a tuple) or "tgt [n]" (continuing one). The
    source word fills the next S cell, the target word rewrites T cell n,
    and [-1] skips the T write.
    """

    def __init__(self, max_position: int = DEFAULT_MAX_POSITION, trace: Optional[TraceSink] = None):
        super().__init__(trace)
        self.buffers = RestoreBuffers(max_position)
        self.groups_done = 0
        self._emitted = 0
        self._current_source: Optional[int] = None
        self._in_tuple = False

    def push(self, token: Token, token_index: int) -> Step:
        if self.ended:
            raise DecodeError(f"Token {token.surface} after [EOS]", token_index)
        if token.surface == EOS:
            if self.buffers.queue:
                raise DecodeError("Incomplete group before [EOS]", token_index)
            self.ended = True
            return Step.END
        if not token.is_position:
            self.buffers.queue.append(token)
            return Step.PENDING

        group = list(self.buffers.queue)
        self.buffers.queue.clear()
        self._execute(group, token, token_index)
        self.groups_done += 1
        self._emit_trace(f"{' '.join(t.surface for t in group + [token])}\t"
                         f"S=[{' '.join(w.surface for w in self.transcription())}] "
                         f"T=[{' '.join(self.buffer_view())}]")
        return Step.TUPLE

    def _execute(self, group: List[Token], op: Token, token_index: int) -> None:
        surfaces = [t.surface for t in group]
        if BL in surfaces:
            split = surfaces.index(BL)
            source_part, target_part = group[:split], group[split + 1:]
            self._open_tuple(source_part, token_index)
        else:
            if not self._in_tuple:
                raise DecodeError("Target group before any source slot", token_index)
            target_part = group

        if len(target_part) == 1 and target_part[0].surface == NO_TGT:
            if op.surface != NEG_POSITION:
                raise DecodeError(f"[NO_TGT] must be followed by [-1], got {op.surface}", token_index)
            return
        if op.surface == NEG_POSITION:
            raise DecodeError("[-1] must follow [NO_TGT]", token_index)
        word = self._word(target_part, token_index)
        self._emitted += 1
        if self.buffers.write_target(op.position, word, self._emitted, self._current_source, token_index):
            message = f"Duplicate position {op.surface}: rewritten with {word.surface}"
            logger.warning(message)
            self.warnings.append(message)

    def _open_tuple(self, source_part: List[Token], token_index: int) -> None:
        self._in_tuple = True
        self.tuples_done += 1
        if len(source_part) == 1 and source_part[0].surface == NO_SRC:
            self._current_source = None
            return
        self._current_source = self.buffers.write_source(self._word(source_part, token_index))

    @staticmethod
    def _word(tokens: List[Token], token_index: int) -> Word:
        try:
            return Word.from_tokens(tokens)
        except ValueError as e:
            raise DecodeError(str(e), token_index) from None

    def pending(self) -> Tuple[Token, ...]:
        return tuple(self.buffers.queue)

    def transcription(self) -> Tuple[Word, ...]:
        return self.buffers.read_source()

    def translation(self) -> Tuple[Word, ...]:
        return self.buffers.read_target()

    def buffer_view(self) -> Tuple[str, ...]:
        return self.buffers.view()

    def _written(self) -> List[Tuple[int, Optional[int]]]:
        return [meta for word, meta in zip(self.buffers.target, self.buffers.target_meta) if word is not None]

    def alignment(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset(
            (source_index, final)
            for final, (_, source_index) in enumerate(self._written(), start=1)
            if source_index is not None
        )

    def emission_ranks(self) -> Tuple[int, ...]:
        emissions = [emission for emission, _ in self._written()]
        # Re-rank so that rewritten cells do not leave holes
        order = {e: rank for rank, e in enumerate(sorted(emissions), start=1)}
        return tuple(order[e] for e in emissions)


_DEFAULT = AbsoluteCodec()


def encode_absolute(tuples: TupleSequence) -> Tuple[Token, ...]:
    return _DEFAULT.encode(tuples)


def validate_absolute(tokens: Sequence[Union[Token, str]],
                      max_position: int = DEFAULT_MAX_POSITION) -> ParseResult:
    return AbsoluteCodec(max_position).validate(tokens)


def decode_absolute(tokens: Sequence[Union[Token, str]], max_position: int = DEFAULT_MAX_POSITION,
                    trace: Optional[TraceSink] = None) -> Restoration:
    return AbsoluteCodec(max_position).decode(tokens, trace)
