import logging
import time
import uuid
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

from opseq.codecs.absolute import AbsoluteCodec
from opseq.codecs.base import Codec, Restoration, Variant
from opseq.codecs.relative import MarkerPolicy, RelativeCodec
from opseq.core.errors import DecodeError
from opseq.core.tokens import JB, JF, SM, Token, render
from opseq.core.types import AlignedSentencePair, Word
from opseq.engine.generator import RandomPairGenerator
from opseq.engine.session import EventKind, StreamSession
from opseq.ingest.pharaoh import format_pharaoh
from opseq.ingest.tuples import build_tuples, tuple_alignment
from opseq.utils.logger import ReportLogger

logger = logging.getLogger(__name__)

REJECTED = "rejected"
INTERPRETER_ERROR = "interpreter-error"
BENIGN = "benign"
SILENT_WRONG = "silent-wrong"


@dataclass
class HarnessReport:
    """Outcome of a round-trip run."""

    run_id: str
    count: int = 0
    passed: int = 0
    failures: Counter = field(default_factory=Counter)
    corruptions: Counter = field(default_factory=Counter)
    first_failure: Optional[Dict[str, Any]] = None
    failure_path: Optional[str] = None
    elapsed: float = 0.0

    @property
    def failed(self) -> int:
        return self.count - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "roundtrip",
            "run_id": self.run_id,
            "date": datetime.now().isoformat(),
            "count": self.count,
            "passed": self.passed,
            "failed": self.failed,
            "failures": dict(self.failures),
            "corruptions": dict(self.corruptions),
            "first_failure": self.first_failure,
            "elapsed": self.elapsed,
        }


def _words(words: Tuple[Word, ...]) -> List[str]:
    return [w.surface for w in words]


class RoundTripHarness:
    """
    Property checker for both serializations.

    Each instance is compiled with both codecs and must decode back to its
    sentences, pass its validator, replay online to the offline result, agree
    across variants, read back its alignment, and survive one corruption
    without silently producing wrong output.
    """

    def __init__(self, generator: RandomPairGenerator, marker_policy: MarkerPolicy = MarkerPolicy.LAZY,
                 report_logger: Optional[ReportLogger] = None, corrupt_decoder: bool = False,
                 report_dir: Optional[str] = None):
        """
        Initialize the harness.

        Args:
            generator: Seeded source of random pairs
            marker_policy: Marker policy of the relative codec
            report_logger: Optional writer for the first failing instance
            corrupt_decoder: Reverse every decoded translation (harness self-test)
            report_dir: Directory of a writer created on the first failure when
                report_logger is not given
        """
        self.generator = generator
        self.codecs: Dict[Variant, Codec] = {
            Variant.ABSOLUTE: AbsoluteCodec(),
            Variant.RELATIVE: RelativeCodec(marker_policy),
        }
        self.report_logger = report_logger
        self.corrupt_decoder = corrupt_decoder
        self.report_dir = report_dir
        self.run_id = str(uuid.uuid4())

    def _decode(self, codec: Codec, stream: Tuple[Token, ...]) -> Restoration:
        restoration = codec.decode(stream)
        if self.corrupt_decoder:
            restoration = Restoration(restoration.transcription, tuple(reversed(restoration.translation)),
                                      restoration.alignment, restoration.emission_ranks)
        return restoration

    def check_pair(self, pair: AlignedSentencePair, monotone: bool = False,
                   corruptions: Optional[Counter] = None) -> List[str]:
        """
        Run every check on one pair.

        Returns:
            Names of the failed checks (empty when the pair passes)
        """
        failed: List[str] = []
        tuples = build_tuples(pair)
        expected_links = tuple_alignment(tuples)
        restored: Dict[Variant, Tuple] = {}

        for variant, codec in self.codecs.items():
            name = variant.value
            stream = codec.encode(tuples)
            if not codec.validate(stream):
                failed.append(f"{name}:validate")
            try:
                restoration = self._decode(codec, stream)
            except DecodeError as e:
                logger.debug("Decode failed: %s", e)
                failed.append(f"{name}:decode")
                continue
            restored[variant] = (restoration.transcription, restoration.translation)
            if restored[variant] != (pair.src, pair.tgt):
                failed.append(f"{name}:roundtrip")
            if restoration.alignment != expected_links:
                failed.append(f"{name}:alignment")

            session = StreamSession(codec)
            for token in stream:
                if session.feed(token).kind is EventKind.ERROR:
                    break
            if session.poisoned or not session.ended:
                failed.append(f"{name}:streaming")
            else:
                final = session.final()
                if (final.transcription, final.translation) != (restoration.transcription, restoration.translation):
                    failed.append(f"{name}:online-offline")
                sources = [s.transcription for s in session.snapshots]
                if any(later[:len(earlier)] != earlier for earlier, later in zip(sources, sources[1:])):
                    failed.append(f"{name}:append-only")

            if variant is Variant.RELATIVE and monotone and any(t.surface in (SM, JB, JF) for t in stream):
                failed.append(f"{name}:monotone-zero")

            outcome = self.corruption_outcome(codec, stream)
            if corruptions is not None:
                corruptions[f"{name}:{outcome}"] += 1
            if outcome == SILENT_WRONG:
                failed.append(f"{name}:corruption")

        if len(restored) == 2 and restored[Variant.ABSOLUTE] != restored[Variant.RELATIVE]:
            failed.append("cross-variant")
        return failed

    def corruption_outcome(self, codec: Codec, stream: Tuple[Token, ...]) -> str:
        """Corrupt a valid stream once and classify what the pipeline made of it."""
        corrupted, kind = self.generator.corrupt(stream, codec.variant)
        if not codec.validate(corrupted):
            return REJECTED
        try:
            result = codec.decode(corrupted)
        except DecodeError:
            return INTERPRETER_ERROR
        original = codec.decode(stream)
        if (result.transcription, result.translation) == (original.transcription, original.translation):
            return BENIGN
        logger.warning("Corruption %s produced a different output without any error", kind)
        return SILENT_WRONG

    def run(self, count: int, monotone: bool = False) -> HarnessReport:
        """
        Check `count` generated instances.

        Args:
            count: Number of instances
            monotone: Draw monotone alignments only

        Returns:
            The HarnessReport
        """
        report = HarnessReport(self.run_id)
        start_time = time.time()
        for index in range(count):
            pair = self.generator.pair(monotone)
            failed = self.check_pair(pair, monotone, report.corruptions)
            report.count += 1
            if not failed:
                report.passed += 1
                continue
            report.failures.update(failed)
            if report.first_failure is None:
                report.first_failure = self.describe_failure(index, pair, failed)
                if self.report_logger is None and self.report_dir is not None:
                    self.report_logger = ReportLogger(self.report_dir)
                if self.report_logger is not None:
                    report.failure_path = self.report_logger.write_report(
                        {"kind": "roundtrip-failure", **report.first_failure})
        report.elapsed = time.time() - start_time
        logger.info("Round trip: %d/%d passed in %.2fs", report.passed, report.count, report.elapsed)
        return report

    def describe_failure(self, index: int, pair: AlignedSentencePair, failed: List[str]) -> Dict[str, Any]:
        tuples = build_tuples(pair)
        return {
            "run_id": self.run_id,
            "index": index,
            "checks": failed,
            "src": " ".join(_words(pair.src)),
            "tgt": " ".join(_words(pair.tgt)),
            "pieces": {"src": [list(w.pieces) for w in pair.src], "tgt": [list(w.pieces) for w in pair.tgt]},
            "align": format_pharaoh(pair.links),
            "streams": {variant.value: render(codec.encode(tuples)) for variant, codec in self.codecs.items()},
        }
