from typing import Optional


class OpSeqError(Exception):
    """Base class for all errors raised by opseq."""


class TokenError(OpSeqError, ValueError):
    """A surface form that is neither a legal word piece nor a special token."""

    def __init__(self, surface: str, reason: str, token_index: Optional[int] = None):
        self.surface = surface
        self.reason = reason
        self.token_index = token_index
        where = f" at token {token_index}" if token_index is not None else ""
        super().__init__(f"Invalid token {surface!r}{where}: {reason}")


class IngestError(OpSeqError, ValueError):
    """Raised when corpus or alignment input cannot be ingested."""

    def __init__(self, message: str, line_number: Optional[int] = None, pair: Optional[str] = None):
        self.line_number = line_number
        self.pair = pair
        prefix = f"line {line_number}: " if line_number is not None else ""
        suffix = f" (pair {pair!r})" if pair is not None else ""
        super().__init__(f"{prefix}{message}{suffix}")


class DecodeError(OpSeqError, ValueError):
    """Raised when an operation sequence cannot be restored."""

    def __init__(self, message: str, token_index: Optional[int] = None):
        self.token_index = token_index
        where = f" at token {token_index}" if token_index is not None else ""
        super().__init__(f"{message}{where}")


class InterpreterError(DecodeError):
    """Raised by the relative buffer machine when an operation cannot be applied."""

    def __init__(self, message: str, op: Optional[str] = None, tuple_index: Optional[int] = None,
                 token_index: Optional[int] = None):
        self.op = op
        self.tuple_index = tuple_index
        if tuple_index is not None:
            message = f"tuple {tuple_index}: {message}"
        super().__init__(message, token_index)


class SessionError(OpSeqError, RuntimeError):
    """Raised when a streaming session is misused."""
