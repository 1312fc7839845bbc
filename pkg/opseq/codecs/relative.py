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
from opseq.codecs.buffers import BufferState, Op, OpKind, TargetCell
from opseq.core.errors import DecodeError, InterpreterError
from opseq.core.tokens import (
    EOP,
    EOS,
    NO_OPS,
    NO_SRC,
    NO_TGT,
    OP_SURFACES,
    T_EOP,
    T_EOS,
    T_JB,
    T_JF,
    T_NO_OPS,
    T_NO_SRC,
    T_NO_TGT,
    T_SM,
    Token,
)
from opseq.core.types import TupleSequence, Word

logger = logging.getLogger(__name__)


class MarkerPolicy(str, Enum):
    LAZY = "lazy"
    EAGER = "eager"


class _Planner:
    """
    Shadow translation buffer used while compiling.

    Cells hold the final position of the word each piece belongs to, or None
    for a marker. Written cells always appear in final-position order, so the
    gap [l..r] of unwritten positions can be entered anywhere between the last
    cell of word l - 1 and the first cell of word r + 1.
    """

    def __init__(self, target_length: int, policy: MarkerPolicy):
        self.length = target_length
        self.policy = policy
        self.cells: List[Optional[int]] = []
        self.head = 0
        self.written = [False] * (target_length + 2)

    def _last_index(self, position: int) -> int:
        for index in range(len(self.cells) - 1, -1, -1):
            if self.cells[index] == position:
                return index
        raise AssertionError(f"position {position} not written")

    def _first_index(self, position: int) -> int:
        return self.cells.index(position)

    def _gap(self, position: int) -> Tuple[int, int]:
        left = position
        while left > 1 and not self.written[left - 1]:
            left -= 1
        right = position
        while right < self.length and not self.written[right + 1]:
            right += 1
        return left, right

    def _slots(self, left: int, right: int) -> Tuple[int, int]:
        lo = self._last_index(left - 1) + 1 if left > 1 else 0
        hi = self._first_index(right + 1) if right < self.length else len(self.cells)
        return lo, hi

    def _markers(self, first: int, last: int) -> List[int]:
        return [i for i in range(max(first, 0), min(last, len(self.cells) - 1) + 1) if self.cells[i] is None]

    def _head_gap_open_and_unmarked(self) -> Tuple[bool, bool]:
        before = next((c for c in reversed(self.cells[:self.head]) if c is not None), 0)
        after = next((c for c in self.cells[self.head:] if c is not None), self.length + 1)
        if after - before <= 1:
            return False, False
        lo, hi = self._slots(before + 1, after - 1)
        return True, not self._markers(lo - 1, hi - 1)

    def _set_marker(self, ops: List[Token]) -> None:
        self.cells.insert(self.head, None)
        self.head += 1
        ops.append(T_SM)

    def place(self, position: int, pieces: int) -> List[Token]:
        """Return the operation tokens that put the word at `position` in place, and insert it."""
        ops: List[Token] = []
        left, right = self._gap(position)
        lo, hi = self._slots(left, right)
        if not lo <= self.head <= hi:
            is_open, unmarked = self._head_gap_open_and_unmarked()
            if self.policy is MarkerPolicy.EAGER or (is_open and unmarked):
                self._set_marker(ops)
                lo, hi = self._slots(left, right)
            candidates = self._markers(lo - 1, hi - 1)
            if not candidates:
                raise AssertionError(f"no marker reaches the gap of position {position}")
            if hi < self.head:
                target = candidates[-1]
                ops.extend(T_JB for _ in self._markers(target, self.head - 2))
            else:
                target = candidates[0]
                ops.extend(T_JF for _ in self._markers(self.head, target))
            self.head = target + 1
        if position != left:
            self._set_marker(ops)
        for _ in range(pieces):
            self.cells.insert(self.head, position)
            self.head += 1
        self.written[position] = True
        return ops


class _State(Enum):
    SRC = "expect source"
    IN_SRC = "in source word"
    OPS_FIRST = "expect operation"
    IN_OPS = "in operation list"
    IN_TGT = "in target word"
    AFTER_NULL = "after [NO_TGT]"
    END = "after [EOS]"


_OPS = tuple(sorted(OP_SURFACES))
_EXPECTED = {
    _State.SRC: ("word", NO_SRC, EOS),
    _State.IN_SRC: ("continuation piece",) + _OPS,
    _State.OPS_FIRST: _OPS,
    _State.IN_OPS: _OPS + ("word", NO_TGT),
    _State.IN_TGT: ("continuation piece", EOP) + _OPS,
    _State.AFTER_NULL: (EOP,) + _OPS,
    _State.END: (),
}


class RelativeRecognizer(Recognizer):
    """
    Grammar state machine of relative streams, fed one token at a time.

    Operations also run on a shadow BufferState, so a jump with no reachable
    marker is rejected at the jump itself.
    """

    def __init__(self):
        super().__init__()
        self.state = _State.SRC
        self.sim = BufferState()
        self._tuple_start = 0
        self._op_list: List[str] = []

    @property
    def expected(self) -> Tuple[str, ...]:
        return _EXPECTED[self.state]

    @property
    def complete(self) -> bool:
        return self.state is _State.END

    def _step(self, token: Token, index: int) -> Optional[str]:
        state = self.state
        surface = token.surface
        if state is _State.END:
            return f"unexpected {surface} after [EOS]"

        if token.is_continuation:
            if state is _State.IN_SRC:
                return None
            if state is _State.IN_TGT:
                self.sim.insert_target(token)
                return None
            return f"continuation piece {surface} without a word start"

        if token.is_word_start:
            if state is _State.SRC:
                self._tuple_start = index
                self.state = _State.IN_SRC
            elif state is _State.IN_OPS:
                self.sim.insert_target(token)
                self.state = _State.IN_TGT
            else:
                return "target word without an operation list"
            return None

        if surface in OP_SURFACES:
            if state in (_State.IN_SRC, _State.OPS_FIRST, _State.IN_TGT, _State.AFTER_NULL):
                self._op_list = []
            elif state is not _State.IN_OPS:
                return f"unexpected {surface}"
            if self._op_list and (surface == NO_OPS or NO_OPS in self._op_list):
                return "[NO_OPS] must be the only operation of its list"
            self._op_list.append(surface)
            try:
                self.sim.apply(Op.from_token(token))
            except InterpreterError as e:
                return f"infeasible jump: {e}"
            self.state = _State.IN_OPS
        elif surface == NO_SRC:
            if state is not _State.SRC:
                return "unexpected [NO_SRC]"
            self._tuple_start = index
            self.state = _State.OPS_FIRST
        elif surface == NO_TGT:
            if state is not _State.IN_OPS:
                return "[NO_TGT] without an operation list"
            self.state = _State.AFTER_NULL
        elif surface == EOP:
            if state is not _State.IN_TGT and state is not _State.AFTER_NULL:
                return "incomplete tuple before [EOP]"
            self.spans.append((self._tuple_start, index + 1))
            self.state = _State.SRC
        elif surface == EOS:
            if state is not _State.SRC:
                return "incomplete tuple before [EOS]"
            if not self.spans:
                return "a stream needs at least one tuple"
            self.state = _State.END
        else:
            return f"{surface} is not part of the relative grammar"
        return None


class RelativeCodec(Codec):
    """
    Relative shift operation sequences.

    Each tuple is serialized as its source slot, then for every target word
    an operation list ([SM]/[JB]/[JF], or [NO_OPS] alone) followed by the
    word, and finally [EOP]. The stream ends with [EOS].
    """

    def __init__(self, marker_policy: Union[MarkerPolicy, str] = MarkerPolicy.LAZY):
        """
        Initialize the codec.

        Args:
            marker_policy: "lazy" marks a gap only when leaving it unmarked with
                positions still unwritten; "eager" marks on every departure
        """
        self.marker_policy = MarkerPolicy(marker_policy)

    @property
    def variant(self) -> Variant:
        return Variant.RELATIVE

    def encode(self, tuples: TupleSequence) -> Tuple[Token, ...]:
        if not tuples.tuples:
            raise ValueError("Cannot encode an empty TupleSequence")
        planner = _Planner(tuples.target_length, self.marker_policy)
        tokens: List[Token] = []
        for tup in tuples:
            tokens.extend(tup.source.tokens() if tup.source is not None else (T_NO_SRC,))
            for entry in tup.targets:
                if entry.is_null:
                    tokens.extend((T_NO_OPS, T_NO_TGT))
                    continue
                ops = planner.place(entry.position, len(entry.word.pieces))
                tokens.extend(ops or (T_NO_OPS,))
                tokens.extend(entry.word.tokens())
            tokens.append(T_EOP)
        tokens.append(T_EOS)
        logger.debug("Compiled %d tuples into %d tokens (%s markers)", len(tuples), len(tokens), self.marker_policy.value)
        return tuple(tokens)

    def recognizer(self) -> RelativeRecognizer:
        return RelativeRecognizer()

    def interpreter(self, trace: Optional[TraceSink] = None) -> "RelativeInterpreter":
        return RelativeInterpreter(trace)


class RelativeInterpreter(Interpreter):
    """
    Buffer-machine restoration of relative shift sequences.

    Tokens wait in Q until [EOP]; the dequeued tuple inserts its source
    pieces into S, then runs each target entry's operations followed by
    INSERT-t of its pieces. Markers stay in T until read-out.
    """

    def __init__(self, trace: Optional[TraceSink] = None):
        super().__init__(trace)
        self.state = BufferState()
        self.queue: List[Tuple[int, Token]] = []
        self._emitted = 0

    def push(self, token: Token, token_index: int) -> Step:
        if self.ended:
            raise DecodeError(f"Token {token.surface} after [EOS]", token_index)
        if token.surface == EOS:
            if self.queue:
                raise DecodeError("Incomplete tuple before [EOS]", token_index)
            self.ended = True
            return Step.END
        if token.surface != EOP:
            self.queue.append((token_index, token))
            return Step.PENDING
        queued, self.queue = self.queue, []
        self._execute(queued, token_index)
        self.tuples_done += 1
        return Step.TUPLE

    def _apply(self, op: Op, token_index: int) -> None:
        try:
            self.state.apply(op)
        except InterpreterError as e:
            raise InterpreterError(str(e), op=e.op, tuple_index=self.tuples_done, token_index=token_index) from None
        self._emit_trace(f"{op}\t{self.state.describe()}")

    def _execute(self, queued: List[Tuple[int, Token]], eop_index: int) -> None:
        if not queued:
            raise DecodeError("Empty tuple", eop_index)
        pos = 0
        first_index, first = queued[0]
        if first.surface == NO_SRC:
            source_index = None
            pos = 1
        elif first.is_word_start:
            pos = 1
            while pos < len(queued) and queued[pos][1].is_continuation:
                pos += 1
            for index, piece in queued[:pos]:
                self._apply(Op(OpKind.INSERT_S, piece), index)
            source_index = len(self.state.read_source())
        else:
            raise DecodeError(f"Tuple must start with a source slot, got {first.surface}", first_index)

        if pos == len(queued):
            raise DecodeError("Tuple without target entries", eop_index)
        while pos < len(queued):
            ops: List[Tuple[int, Token]] = []
            while pos < len(queued) and queued[pos][1].is_op:
                ops.append(queued[pos])
                pos += 1
            if not ops:
                index, token = queued[pos] if pos < len(queued) else (eop_index, T_EOP)
                raise DecodeError(f"Target entry without an operation list at {token.surface}", index)
            surfaces = [t.surface for _, t in ops]
            if NO_OPS in surfaces and len(surfaces) > 1:
                raise DecodeError("[NO_OPS] mixed with other operations", ops[0][0])
            for index, token in ops:
                if token.surface != NO_OPS:
                    self._apply(Op.from_token(token), index)
            if pos == len(queued):
                raise DecodeError("Operation list without a target", eop_index)
            index, token = queued[pos]
            if token.surface == NO_TGT:
                pos += 1
                continue
            if not token.is_word_start:
                raise DecodeError(f"Expected a target word, got {token.surface}", index)
            end = pos + 1
            while end < len(queued) and queued[end][1].is_continuation:
                end += 1
            self._emitted += 1
            for _, piece in queued[pos:end]:
                self.state.insert_target(piece, self._emitted, source_index)
                self._emit_trace(f"{Op(OpKind.INSERT_T, piece)}\t{self.state.describe()}")
            pos = end

    def pending(self) -> Tuple[Token, ...]:
        return tuple(token for _, token in self.queue)

    def transcription(self) -> Tuple[Word, ...]:
        return self.state.read_source()

    def translation(self) -> Tuple[Word, ...]:
        return self.state.read_target()

    def buffer_view(self) -> Tuple[str, ...]:
        return self.state.view()

    def _word_cells(self) -> List[TargetCell]:
        return [cell for cell in self.state.target_cells() if cell.token.is_word_start]

    def alignment(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset(
            (cell.source_index, final)
            for final, cell in enumerate(self._word_cells(), start=1)
            if cell.source_index is not None
        )

    def emission_ranks(self) -> Tuple[int, ...]:
        return tuple(cell.emission for cell in self._word_cells())


_DEFAULT = RelativeCodec()


def encode_relative(tuples: TupleSequence,
                    marker_policy: Union[MarkerPolicy, str] = MarkerPolicy.LAZY) -> Tuple[Token, ...]:
    return RelativeCodec(marker_policy).encode(tuples)


def validate_relative(tokens: Sequence[Union[Token, str]]) -> ParseResult:
    return _DEFAULT.validate(tokens)


def decode_relative(tokens: Sequence[Union[Token, str]], trace: Optional[TraceSink] = None) -> Restoration:
    return _DEFAULT.decode(tokens, trace)
