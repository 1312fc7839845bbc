import re
from dataclasses import dataclass
from itertools import zip_longest
from typing import FrozenSet, Iterable, Iterator, Optional, Tuple

from opseq.core.errors import IngestError, TokenError
from opseq.core.types import AlignedSentencePair, words_from_line

_PAIR_RE = re.compile(r"^(\d+)-(\d+)$")


@dataclass(frozen=True)
class CorpusRecord:
    """One line-aligned record: source text, target text and a Pharaoh alignment line."""

    src_line: str
    tgt_line: str
    align_line: str
    line_number: int = 0


def parse_pharaoh(align_line: str, src_len: int, tgt_len: int,
                  line_number: Optional[int] = None) -> FrozenSet[Tuple[int, int]]:
    """
    Parse a Pharaoh alignment line ("i-j" pairs, 0-based) into 1-based links.

    Args:
        align_line: Space-separated "i-j" pairs
        src_len: Number of source words
        tgt_len: Number of target words
        line_number: Corpus line used in error messages

    Returns:
        The deduplicated set of (i + 1, j + 1) links

    Raises:
        IngestError: for a malformed pair or an index out of range
    """
    if src_len < 1 or tgt_len < 1:
        raise IngestError(f"Sentence lengths must be >= 1 (got {src_len}, {tgt_len})", line_number)
    links = set()
    for pair in align_line.split():
        match = _PAIR_RE.match(pair)
        if match is None:
            raise IngestError("Malformed alignment pair", line_number, pair)
        i, j = int(match.group(1)), int(match.group(2))
        if i >= src_len or j >= tgt_len:
            raise IngestError(
                f"Alignment index out of range for {src_len} source and {tgt_len} target words",
                line_number, pair,
            )
        links.add((i + 1, j + 1))
    return frozenset(links)


def format_pharaoh(links: Iterable[Tuple[int, int]]) -> str:
    """Render 1-based links as a sorted 0-based Pharaoh line."""
    return " ".join(f"{i - 1}-{j - 1}" for i, j in sorted(links))


def record_to_pair(record: CorpusRecord, segmented: bool = False) -> AlignedSentencePair:
    """
    Turn a raw corpus record into an AlignedSentencePair.

    Raises:
        IngestError: if the text contains reserved forms or the alignment is invalid
    """
    try:
        src = words_from_line(record.src_line, segmented)
        tgt = words_from_line(record.tgt_line, segmented)
    except TokenError as e:
        raise IngestError(str(e), record.line_number) from None
    if not src or not tgt:
        links = frozenset()
        if record.align_line.strip():
            raise IngestError("Alignment given for an empty sentence", record.line_number)
    else:
        links = parse_pharaoh(record.align_line, len(src), len(tgt), record.line_number)
    return AlignedSentencePair(src, tgt, links)


def _strip(line: str) -> str:
    # Trailing whitespace (including the newline) only
    return line.rstrip()


def read_parallel(src_path: str, tgt_path: str, align_path: str) -> Iterator[CorpusRecord]:
    """
    Stream records from three line-aligned UTF-8 files.

    Raises:
        IngestError: if the files do not have the same number of lines
    """
    with open(src_path, encoding="utf-8") as src_f, \
            open(tgt_path, encoding="utf-8") as tgt_f, \
            open(align_path, encoding="utf-8") as align_f:
        for line_number, lines in enumerate(zip_longest(src_f, tgt_f, align_f), start=1):
            if any(line is None for line in lines):
                raise IngestError("Source, target and alignment files differ in length", line_number)
            src, tgt, align = (_strip(line) for line in lines)
            yield CorpusRecord(src, tgt, align, line_number)


def read_tsv(path: str) -> Iterator[CorpusRecord]:
    """
    Stream records from a combined "src TAB tgt TAB align" file.

    Malformed lines are yielded as IngestError instances so that batch
    callers can log them and carry on.
    """
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            fields = _strip(line).split("\t")
            if len(fields) == 2:
                fields.append("")
            if len(fields) != 3:
                yield IngestError(f"Expected 3 tab-separated fields, got {len(fields)}", line_number)
                continue
            yield CorpusRecord(fields[0], fields[1], fields[2], line_number)
