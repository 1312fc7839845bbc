import multiprocessing as mp
from dataclasses import dataclass, field
from functools import partial
from itertools import islice
from typing import Callable, Iterable, Iterator, List, Optional, TypeVar, Union

from opseq.codecs.base import Codec, Variant
from opseq.codecs.registry import get_codec
from opseq.core.errors import DecodeError, IngestError, TokenError
from opseq.core.tokens import render, tokenize
from opseq.ingest.filters import DEFAULT_MAX_RATIO, DEFAULT_MAX_TGT_LEN, filter_record
from opseq.ingest.pharaoh import CorpusRecord, format_pharaoh, record_to_pair
from opseq.ingest.tuples import build_tuples

CHUNK_SIZE = 1000

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class CodecSettings:
    """Picklable codec and filter settings shared by the line workers."""

    variant: Variant = Variant.RELATIVE
    max_position: int = 512
    marker_policy: str = "lazy"
    max_ratio: float = DEFAULT_MAX_RATIO
    max_tgt_len: int = DEFAULT_MAX_TGT_LEN
    segmented: bool = False
    trace: bool = False

    def codec(self) -> Codec:
        return get_codec(self.variant, self.max_position, self.marker_policy)


@dataclass(frozen=True)
class EncodeResult:
    line_number: int
    stream: Optional[str] = None
    dropped: Optional[str] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class DecodeResult:
    line_number: int
    source: str = ""
    target: str = ""
    alignment: str = ""
    complete: bool = False
    trace: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    error: Optional[str] = None
    token_index: Optional[int] = None


@dataclass(frozen=True)
class ValidateResult:
    line_number: int
    accepted: bool
    error_index: Optional[int] = None
    message: str = ""
    expected: List[str] = field(default_factory=list)


def encode_record(record: Union[CorpusRecord, IngestError], settings: CodecSettings) -> EncodeResult:
    """Ingest, filter and compile one corpus record."""
    if isinstance(record, IngestError):
        return EncodeResult(record.line_number or 0, error=str(record))
    try:
        pair = record_to_pair(record, settings.segmented)
    except IngestError as e:
        return EncodeResult(record.line_number, error=str(e))
    decision = filter_record(pair, settings.max_ratio, settings.max_tgt_len)
    if not decision.keep:
        return EncodeResult(record.line_number, dropped=decision.reason)
    stream = settings.codec().encode(build_tuples(pair))
    return EncodeResult(record.line_number, stream=render(stream))


def decode_line(numbered: tuple, settings: CodecSettings) -> DecodeResult:
    """Restore one serialized stream line; failures become an error result."""
    line_number, line = numbered
    trace: List[str] = []
    try:
        restoration = settings.codec().decode(tokenize(line), trace.append if settings.trace else None)
    except TokenError as e:
        return DecodeResult(line_number, error=str(e), token_index=e.token_index)
    except DecodeError as e:
        return DecodeResult(line_number, trace=trace, error=str(e), token_index=e.token_index)
    return DecodeResult(
        line_number,
        source=restoration.source_text,
        target=restoration.target_text,
        alignment=format_pharaoh(restoration.alignment),
        complete=restoration.complete,
        trace=trace,
        warnings=list(restoration.warnings),
    )


def validate_line(numbered: tuple, settings: CodecSettings) -> ValidateResult:
    line_number, line = numbered
    result = settings.codec().validate(line.split())
    return ValidateResult(line_number, result.accepted, result.error_index, result.message, list(result.expected))


def run_parallel(worker: Callable[[T], R], items: Iterable[T], jobs: int = 1,
                 chunk_size: int = CHUNK_SIZE) -> Iterator[R]:
    """
    Apply worker to every item, yielding results in input order.

    Items are read chunk by chunk so that memory stays bounded by the chunk
    size rather than the corpus size.

    Args:
        worker: A picklable callable
        items: The inputs
        jobs: Number of worker processes (1 runs in-process)
        chunk_size: Items per dispatched chunk
    """
    iterator = iter(items)
    if jobs <= 1:
        yield from map(worker, iterator)
        return
    with mp.Pool(processes=jobs) as pool:
        while True:
            chunk = list(islice(iterator, chunk_size))
            if not chunk:
                break
            yield from pool.map(worker, chunk, chunksize=max(1, len(chunk) // jobs))


def encode_corpus(records: Iterable[Union[CorpusRecord, IngestError]], settings: CodecSettings,
                  jobs: int = 1) -> Iterator[EncodeResult]:
    return run_parallel(partial(encode_record, settings=settings), records, jobs)


def decode_stream_lines(lines: Iterable[str], settings: CodecSettings, jobs: int = 1) -> Iterator[DecodeResult]:
    numbered = ((number, line.rstrip("\n")) for number, line in enumerate(lines, start=1))
    return run_parallel(partial(decode_line, settings=settings), numbered, jobs)


def validate_stream_lines(lines: Iterable[str], settings: CodecSettings,
                          jobs: int = 1) -> Iterator[ValidateResult]:
    numbered = ((number, line.rstrip("\n")) for number, line in enumerate(lines, start=1))
    return run_parallel(partial(validate_line, settings=settings), numbered, jobs)
