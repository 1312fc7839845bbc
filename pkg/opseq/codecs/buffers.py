from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, List, Optional, Tuple, Union

from opseq.core.errors import DecodeError, InterpreterError
from opseq.core.tokens import JB, JF, NO_OPS, SM, Token
from opseq.core.types import Word, words_from_tokens


class _Marker:
    """The marker cell of the translation buffer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "*"


MARKER = _Marker()


@dataclass(frozen=True)
class TargetCell:
    """A target word piece in T, tagged with the emission rank and source index of its word."""

    token: Token
    emission: int = 0
    source_index: Optional[int] = None


class OpKind(str, Enum):
    SET_MARKER = "SM"
    JMP_FWD = "JF"
    JMP_BWD = "JB"
    INSERT_T = "INSERT-t"
    INSERT_S = "INSERT-s"
    NO_OPS = "NO_OPS"


_OP_BY_SURFACE = {SM: OpKind.SET_MARKER, JF: OpKind.JMP_FWD, JB: OpKind.JMP_BWD, NO_OPS: OpKind.NO_OPS}


@dataclass(frozen=True)
class Op:
    """One buffer-machine operation; inserts carry the piece to insert."""

    kind: OpKind
    token: Optional[Token] = None

    @classmethod
    def from_token(cls, token: Token) -> "Op":
        try:
            return cls(_OP_BY_SURFACE[token.surface])
        except KeyError:
            raise ValueError(f"{token.surface} is not an operation token") from None

    def __str__(self) -> str:
        if self.token is not None:
            return f"{self.kind.value}({self.token.surface})"
        return self.kind.value


class BufferState:
    """
    Relative-shift interpreter state.

    S only grows at its end (its write-head is len(S)). T holds word pieces
    and markers; the translation write-head is an insertion index in
    [0, len(T)].
    """

    def __init__(self):
        self.source: List[Token] = []
        self.target: List[Union[_Marker, TargetCell]] = []
        self.head = 0
        self.marker_count = 0

    @property
    def source_head(self) -> int:
        return len(self.source)

    def set_marker(self) -> None:
        self.target.insert(self.head, MARKER)
        self.head += 1
        self.marker_count += 1

    def jump_backward(self) -> None:
        # A marker at head - 1 is the one the head already sits behind
        for index in range(self.head - 2, -1, -1):
            if self.target[index] is MARKER:
                self.head = index + 1
                return
        raise InterpreterError("[JB] with no marker to the left of the write-head", op=JB)

    def jump_forward(self) -> None:
        for index in range(self.head, len(self.target)):
            if self.target[index] is MARKER:
                self.head = index + 1
                return
        raise InterpreterError("[JF] with no marker to the right of the write-head", op=JF)

    def insert_target(self, token: Token, emission: int = 0, source_index: Optional[int] = None) -> None:
        self.target.insert(self.head, TargetCell(token, emission, source_index))
        self.head += 1

    def insert_source(self, token: Token) -> None:
        self.source.append(token)

    def apply(self, op: Op) -> "BufferState":
        if op.kind is OpKind.SET_MARKER:
            self.set_marker()
        elif op.kind is OpKind.JMP_BWD:
            self.jump_backward()
        elif op.kind is OpKind.JMP_FWD:
            self.jump_forward()
        elif op.kind is OpKind.INSERT_T:
            self.insert_target(op.token)
        elif op.kind is OpKind.INSERT_S:
            self.insert_source(op.token)
        return self

    def target_cells(self) -> List[TargetCell]:
        return [cell for cell in self.target if cell is not MARKER]

    def read_source(self) -> Tuple[Word, ...]:
        return words_from_tokens(self.source)

    def read_target(self) -> Tuple[Word, ...]:
        """Read out T with the markers removed."""
        return words_from_tokens([cell.token for cell in self.target_cells()])

    def view(self) -> Tuple[str, ...]:
        return tuple("*" if cell is MARKER else cell.token.surface for cell in self.target)

    def describe(self) -> str:
        """One-line rendering: heads and both buffers, "|" marking the T write-head."""
        cells = list(self.view())
        cells.insert(self.head, "|")
        source = " ".join(t.surface for t in self.source)
        return f"s_head={self.source_head} t_head={self.head} S=[{source}] T=[{' '.join(cells)}]"


def apply_op(state: BufferState, op: Op) -> BufferState:
    """
    Apply one operation to a BufferState.

    Raises:
        InterpreterError: for a jump with no marker in its direction
    """
    return state.apply(op)


@dataclass
class RestoreBuffers:
    """
    Absolute-position restoration buffers.

    S and T are growable lists of placeholder (None) or Word cells, capped at
    max_position; Q is the FIFO queue of tokens not yet dequeued.
    """

    max_position: int = 512
    source: List[Optional[Word]] = field(default_factory=list)
    target: List[Optional[Word]] = field(default_factory=list)
    target_meta: List[Optional[Tuple[int, Optional[int]]]] = field(default_factory=list)
    queue: Deque[Token] = field(default_factory=deque)

    def write_source(self, word: Word) -> int:
        """Write the next free S cell; return its 1-based index."""
        self.source.append(word)
        return len(self.source)

    def write_target(self, position: int, word: Word, emission: int = 0,
                     source_index: Optional[int] = None, token_index: Optional[int] = None) -> bool:
        """
        Write T cell `position` (1-based).

        Returns:
            True if the cell already held a word (it is rewritten)

        Raises:
            DecodeError: if position exceeds max_position
        """
        if position > self.max_position:
            raise DecodeError(f"Position [{position}] exceeds the maximum of {self.max_position}", token_index)
        while len(self.target) < position:
            self.target.append(None)
            self.target_meta.append(None)
        rewritten = self.target[position - 1] is not None
        self.target[position - 1] = word
        self.target_meta[position - 1] = (emission, source_index)
        return rewritten

    def read_source(self) -> Tuple[Word, ...]:
        return tuple(w for w in self.source if w is not None)

    def read_target(self) -> Tuple[Word, ...]:
        return tuple(w for w in self.target if w is not None)

    def view(self) -> Tuple[str, ...]:
        return tuple("_" if w is None else w.surface for w in self.target)
