import csv
import logging
import sys
from contextlib import ExitStack
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from opseq.codecs.base import Variant
from opseq.codecs.relative import MarkerPolicy
from opseq.config import JobConfig
from opseq.core.errors import IngestError, OpSeqError
from opseq.core.tokens import SPECIAL_SURFACES
from opseq.engine.generator import RandomPairGenerator
from opseq.engine.harness import RoundTripHarness
from opseq.engine.pipeline import decode_stream_lines, encode_corpus, validate_stream_lines
from opseq.engine.session import EventKind, StreamSession
from opseq.ingest.pharaoh import CorpusRecord, read_parallel, read_tsv, record_to_pair
from opseq.metrics.latency import average_lagging
from opseq.metrics.quality import EvalPair, bleu, corpus_wer
from opseq.metrics.stats import OpSeqStats, opseq_stats
from opseq.utils.logger import ReportLogger, configure_logging

logger = logging.getLogger(__name__)

# Create console for rich output
console = Console()

# Create Typer app
app = typer.Typer(help="opseq: operation-sequence compiler, interpreter and evaluator")

EXIT_FAILED = 1
EXIT_BAD_INPUT = 2

_VARIANT_HELP = "Serialization variant: abs or rel"
_POLICY_HELP = "Marker placement policy of the relative variant: lazy or eager"


def _config(**kwargs) -> JobConfig:
    """Build the job configuration or exit with code 2."""
    try:
        return JobConfig(**{k: v for k, v in kwargs.items() if v is not None})
    except ValidationError as e:
        console.print("[red]Invalid configuration:[/red]")
        for error in e.errors():
            field = ".".join(str(part) for part in error["loc"]) or "config"
            console.print(f"  [red]{escape(field)}[/red]: {escape(error['msg'])}")
        sys.exit(EXIT_BAD_INPUT)


def _fail(message: str, code: int = EXIT_BAD_INPUT) -> None:
    console.print(f"[red]{escape(message)}[/red]")
    sys.exit(code)


def _records(config: JobConfig) -> Iterator[Union[CorpusRecord, IngestError]]:
    if config.tsv is not None:
        return read_tsv(str(config.tsv))
    return read_parallel(str(config.src), str(config.tgt), str(config.align))


def _read_lines(path: Path) -> List[str]:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f]


def _summary(title: str, rows: List[Tuple[str, str]]) -> None:
    console.print(f"\n[bold]{title}[/bold]")
    table = Table(show_header=True)
    table.add_column("Property")
    table.add_column("Value")
    for name, value in rows:
        table.add_row(name, value)
    console.print(table)


def _log_path(output: Path, suffix: str) -> str:
    return str(output.with_name(output.name + suffix))


@app.command()
def encode(
    variant: Variant = typer.Option(Variant.RELATIVE, "--variant", "-v", help=_VARIANT_HELP),
    src: Optional[Path] = typer.Option(None, "--src", help="Source sentences, one per line"),
    tgt: Optional[Path] = typer.Option(None, "--tgt", help="Target sentences, one per line"),
    align: Optional[Path] = typer.Option(None, "--align", help="Pharaoh alignments, one per line"),
    tsv: Optional[Path] = typer.Option(None, "--tsv", help="Combined src<TAB>tgt<TAB>align file"),
    output: Path = typer.Option(..., "--out", "-o", help="Operation-sequence output file"),
    max_ratio: float = typer.Option(5.0, "--max-ratio", help="Drop pairs whose length ratio exceeds this"),
    max_tgt_len: int = typer.Option(150, "--max-tgt-len", help="Drop pairs with more target tokens"),
    marker_policy: MarkerPolicy = typer.Option(MarkerPolicy.LAZY, "--marker-policy", help=_POLICY_HELP),
    segmented: bool = typer.Option(False, "--segmented", help="Input is split into pieces with '@@ '"),
    strict: bool = typer.Option(False, "--strict", help="Stop at the first bad line"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes (default: all cores)"),
    verbose: bool = typer.Option(False, "--verbose", help="Show debug logging"),
):
    """Compile an aligned parallel corpus into operation sequences."""
    configure_logging(verbose)
    config = _config(variant=variant, src=src, tgt=tgt, align=align, tsv=tsv, output=output,
                     max_ratio=max_ratio, max_tgt_len=max_tgt_len, marker_policy=marker_policy,
                     segmented=segmented, strict=strict, jobs=jobs)
    if not config.has_corpus:
        _fail("encode needs --src/--tgt/--align or --tsv")

    reports = ReportLogger(str(config.output.parent))
    drop_log, error_log = _log_path(config.output, ".drops.jsonl"), _log_path(config.output, ".errors.jsonl")
    drops: List[Dict] = []
    errors: List[Dict] = []
    written = 0
    try:
        with open(config.output, "w", encoding="utf-8") as out:
            for result in encode_corpus(_records(config), config.codec_settings(), config.jobs):
                if result.error is not None:
                    logger.error("line %d: %s", result.line_number, result.error)
                    errors.append({"line": result.line_number, "error": result.error})
                    if config.strict:
                        break
                elif result.dropped is not None:
                    drops.append({"line": result.line_number, "reason": result.dropped})
                else:
                    out.write(result.stream + "\n")
                    written += 1
    except (OSError, IngestError) as e:
        _fail(f"Cannot read corpus: {e}")

    reports.write_jsonl(drop_log, drops)
    if errors:
        reports.write_jsonl(error_log, errors)

    _summary("Encode Results", [
        ("Variant", config.variant.value),
        ("Encoded", str(written)),
        ("Dropped", str(len(drops))),
        ("Errors", str(len(errors))),
        ("Output", str(config.output)),
        ("Drop log", drop_log),
    ])
    if errors and config.strict:
        sys.exit(EXIT_BAD_INPUT)


@app.command()
def decode(
    variant: Variant = typer.Option(Variant.RELATIVE, "--variant", "-v", help=_VARIANT_HELP),
    input: Path = typer.Option(..., "--in", "-i", help="Operation-sequence file"),
    output: Path = typer.Option(..., "--out", "-o", help="Output prefix: writes PREFIX.src and PREFIX.tgt"),
    align_out: Optional[Path] = typer.Option(None, "--align", help="Write the restored alignment (Pharaoh)"),
    trace: Optional[Path] = typer.Option(None, "--trace", help="Write an operation-level debug trace"),
    max_position: int = typer.Option(512, "--max-position", help="Largest absolute position token"),
    strict: bool = typer.Option(False, "--strict", help="Stop at the first bad line"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes (default: all cores)"),
    verbose: bool = typer.Option(False, "--verbose", help="Show debug logging"),
):
    """Restore transcription and translation files from operation sequences."""
    configure_logging(verbose)
    config = _config(variant=variant, input=input, output=output, align_out=align_out, trace=trace,
                     max_position=max_position, strict=strict, jobs=jobs)

    errors: List[Dict] = []
    incomplete = 0
    lines = 0
    try:
        with ExitStack() as stack:
            src_out = stack.enter_context(open(_log_path(config.output, ".src"), "w", encoding="utf-8"))
            tgt_out = stack.enter_context(open(_log_path(config.output, ".tgt"), "w", encoding="utf-8"))
            align_f = stack.enter_context(open(config.align_out, "w", encoding="utf-8")) if config.align_out else None
            trace_f = stack.enter_context(open(config.trace, "w", encoding="utf-8")) if config.trace else None
            in_f = stack.enter_context(open(config.input, encoding="utf-8"))
            for result in decode_stream_lines(in_f, config.codec_settings(), config.jobs):
                lines += 1
                if trace_f is not None:
                    trace_f.write(f"# line {result.line_number}\n")
                    trace_f.writelines(line + "\n" for line in result.trace)
                if result.error is not None:
                    logger.error("line %d: %s", result.line_number, result.error)
                    errors.append({"line": result.line_number, "token": result.token_index, "error": result.error})
                    if config.strict:
                        break
                elif not result.complete:
                    incomplete += 1
                    logger.warning("line %d: missing [EOS], restored up to the last complete tuple",
                                   result.line_number)
                src_out.write(result.source + "\n")
                tgt_out.write(result.target + "\n")
                if align_f is not None:
                    align_f.write(result.alignment + "\n")
    except OSError as e:
        _fail(f"Cannot decode: {e}")

    if errors:
        ReportLogger(str(config.output.parent)).append_jsonl(_log_path(config.output, ".errors.jsonl"), errors)
    _summary("Decode Results", [
        ("Variant", config.variant.value),
        ("Lines", str(lines)),
        ("Errors", str(len(errors))),
        ("Incomplete", str(incomplete)),
    ])
    if errors and config.strict:
        sys.exit(EXIT_BAD_INPUT)


@app.command()
def validate(
    variant: Variant = typer.Option(Variant.RELATIVE, "--variant", "-v", help=_VARIANT_HELP),
    input: Path = typer.Option(..., "--in", "-i", help="Operation-sequence file"),
    max_position: int = typer.Option(512, "--max-position", help="Largest absolute position token"),
    report: Optional[Path] = typer.Option(None, "--report", help="Write a JSON grammar report"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes (default: all cores)"),
):
    """Check every line of an operation-sequence file against the grammar."""
    configure_logging()
    config = _config(variant=variant, input=input, max_position=max_position, report=report, jobs=jobs)

    rejected = []
    accepted = 0
    with open(config.input, encoding="utf-8") as f:
        for result in validate_stream_lines(f, config.codec_settings(), config.jobs):
            if result.accepted:
                accepted += 1
            else:
                rejected.append(result)

    if rejected:
        table = Table(show_header=True, title="Rejected lines")
        table.add_column("Line")
        table.add_column("Token")
        table.add_column("Error")
        for result in rejected:
            table.add_row(str(result.line_number), str(result.error_index), escape(result.message))
        console.print(table)
    _summary("Validate Results", [
        ("Variant", config.variant.value),
        ("Accepted", str(accepted)),
        ("Rejected", str(len(rejected))),
    ])
    if config.report is not None:
        ReportLogger(str(config.report.parent)).write_report({
            "kind": "validate",
            "variant": config.variant.value,
            "accepted": accepted,
            "rejected": [
                {"line": r.line_number, "token": r.error_index, "message": r.message, "expected": r.expected}
                for r in rejected
            ],
        }, str(config.report))
    if rejected:
        sys.exit(EXIT_FAILED)


@app.command()
def roundtrip(
    seed: int = typer.Option(..., "--seed", help="Random seed"),
    count: int = typer.Option(1000, "--count", "-n", help="Number of random instances"),
    src: Optional[Path] = typer.Option(None, "--src", help="Check a corpus instead: source sentences"),
    tgt: Optional[Path] = typer.Option(None, "--tgt", help="Target sentences"),
    align: Optional[Path] = typer.Option(None, "--align", help="Pharaoh alignments"),
    tsv: Optional[Path] = typer.Option(None, "--tsv", help="Combined src<TAB>tgt<TAB>align file"),
    monotone: bool = typer.Option(False, "--monotone", help="Draw monotone alignments only"),
    marker_policy: MarkerPolicy = typer.Option(MarkerPolicy.LAZY, "--marker-policy", help=_POLICY_HELP),
    segmented: bool = typer.Option(False, "--segmented", help="Corpus is split into pieces with '@@ '"),
    report: Optional[Path] = typer.Option(None, "--report", help="Write a JSON run report"),
    corrupt_decoder: bool = typer.Option(False, "--corrupt-decoder", hidden=True),
    verbose: bool = typer.Option(False, "--verbose", help="Show debug logging"),
):
    """Check round-trip properties on random instances or on a corpus."""
    configure_logging(verbose)
    config = _config(seed=seed, count=count, src=src, tgt=tgt, align=align, tsv=tsv,
                     marker_policy=marker_policy, segmented=segmented, report=report)

    log_dir = str(config.report.parent) if config.report is not None else "opseq_logs"
    harness = RoundTripHarness(RandomPairGenerator(config.seed), config.marker_policy,
                               corrupt_decoder=corrupt_decoder, report_dir=log_dir)

    if config.has_corpus:
        checked, failed = 0, 0
        try:
            for record in _records(config):
                if isinstance(record, IngestError):
                    logger.error("%s", record)
                    continue
                try:
                    pair = record_to_pair(record, config.segmented)
                except IngestError as e:
                    logger.error("%s", e)
                    continue
                if not pair.src or not pair.tgt:
                    continue
                checked += 1
                problems = harness.check_pair(pair)
                if problems:
                    failed += 1
                    console.print(f"[red]line {record.line_number}: {escape(', '.join(problems))}[/red]")
        except (OSError, IngestError) as e:
            _fail(f"Cannot read corpus: {e}")
        _summary("Round-trip Results", [("Pairs", str(checked)), ("Passed", str(checked - failed)),
                                        ("Failed", str(failed))])
        if failed:
            sys.exit(EXIT_FAILED)
        return

    result = harness.run(config.count, monotone)
    rows = [
        ("Run ID", result.run_id),
        ("Seed", str(config.seed)),
        ("Instances", str(result.count)),
        ("Passed", str(result.passed)),
        ("Failed", str(result.failed)),
        ("Elapsed", f"{result.elapsed:.2f}s"),
    ]
    rows.extend((f"Corruption {name}", str(n)) for name, n in sorted(result.corruptions.items()))
    rows.extend((f"Failed check {name}", str(n)) for name, n in sorted(result.failures.items()))
    _summary("Round-trip Results", rows)
    if config.report is not None:
        ReportLogger(log_dir).write_report(result.to_dict(), str(config.report))
    if not result.ok:
        if result.failure_path:
            console.print(f"\nFirst failing instance saved to: {result.failure_path}\n")
        sys.exit(EXIT_FAILED)


def _partials(lines: List[str], variant: Variant) -> List[List[Tuple[float, str]]]:
    """Per line: (fraction of the stream consumed, partial translation) at every snapshot."""
    curves = []
    for number, line in enumerate(lines, start=1):
        tokens = line.split()
        session = StreamSession(variant)
        for token in tokens:
            if session.feed(token).kind is EventKind.ERROR or session.ended:
                break
        if session.poisoned:
            logger.warning("line %d: %s", number, session.error)
        total = max(len(tokens), 1)
        curves.append([((index + 1) / total, text) for index, text in session.partial_hypotheses()])
    return curves


def _binned_bleu(curves: List[List[Tuple[float, str]]], references: List[str], bins: int) -> List[float]:
    scores = []
    for b in range(1, bins + 1):
        limit = b / bins
        hypotheses = []
        for curve in curves:
            reached = [text for fraction, text in curve if fraction <= limit + 1e-12]
            hypotheses.append(reached[-1] if reached else "")
        scores.append(bleu(EvalPair.from_text(h, r) for h, r in zip(hypotheses, references)))
    return scores


@app.command("eval-partial")
def eval_partial(
    variant: Variant = typer.Option(Variant.RELATIVE, "--variant", "-v", help=_VARIANT_HELP),
    input: Path = typer.Option(..., "--in", "-i", help="Operation-sequence file"),
    reference: Path = typer.Option(..., "--reference", "-r", help="Reference translations"),
    baseline: Optional[Path] = typer.Option(None, "--baseline", help="Operation sequences of a baseline system"),
    bins: int = typer.Option(10, "--bins", help="Number of stream-progress bins"),
    output: Path = typer.Option(..., "--out", "-o", help="CSV output"),
):
    """BLEU of streaming partial hypotheses against stream progress."""
    configure_logging()
    config = _config(variant=variant, input=input, reference=reference, baseline=baseline, bins=bins,
                     output=output)
    lines, references = _read_lines(config.input), _read_lines(config.reference)
    if not references:
        _fail("Reference file is empty")
    if len(lines) != len(references):
        _fail(f"{len(lines)} streams but {len(references)} references")

    scores = _binned_bleu(_partials(lines, config.variant), references, config.bins)
    header = ["bin", "progress", "bleu"]
    baseline_scores = None
    if config.baseline is not None:
        baseline_lines = _read_lines(config.baseline)
        if len(baseline_lines) != len(references):
            _fail(f"{len(baseline_lines)} baseline streams but {len(references)} references")
        baseline_scores = _binned_bleu(_partials(baseline_lines, config.variant), references, config.bins)
        header.extend(["baseline_bleu", "difference"])

    with open(config.output, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for b, score in enumerate(scores, start=1):
            row = [b, f"{b / config.bins:.4f}", f"{score:.4f}"]
            if baseline_scores is not None:
                row.extend([f"{baseline_scores[b - 1]:.4f}", f"{score - baseline_scores[b - 1]:.4f}"])
            writer.writerow(row)
    _summary("Partial BLEU", [(f"bin {b}", f"{s:.2f}") for b, s in enumerate(scores, start=1)])


@app.command()
def score(
    input: Path = typer.Option(..., "--in", "-i", help="Hypotheses, one per line"),
    reference: Path = typer.Option(..., "--reference", "-r", help="References, one per line"),
    smooth: bool = typer.Option(False, "--smooth", help="Smooth zero n-gram precisions"),
    report: Optional[Path] = typer.Option(None, "--report", help="Write a JSON metric report"),
):
    """WER and case-insensitive BLEU of a hypothesis file."""
    configure_logging()
    config = _config(input=input, reference=reference, report=report)
    hypotheses, references = _read_lines(config.input), _read_lines(config.reference)
    if len(hypotheses) != len(references):
        _fail(f"{len(hypotheses)} hypotheses but {len(references)} references")

    pairs = [EvalPair.from_text(h, r) for h, r in zip(hypotheses, references)]
    result = {"kind": "score", "lines": len(pairs), "wer": corpus_wer(pairs), "bleu": bleu(pairs, smooth)}
    _summary("Scores", [("Lines", str(result["lines"])), ("WER", f"{result['wer']:.4f}"),
                        ("BLEU", f"{result['bleu']:.2f}")])
    if config.report is not None:
        ReportLogger(str(config.report.parent)).write_report(result, str(config.report))


@app.command()
def stats(
    variant: Variant = typer.Option(Variant.RELATIVE, "--variant", "-v", help=_VARIANT_HELP),
    input: Path = typer.Option(..., "--in", "-i", help="Operation-sequence file"),
    report: Optional[Path] = typer.Option(None, "--report", help="Write a JSON statistics report"),
):
    """Aggregate operation counts and reordering distance over a file."""
    configure_logging()
    config = _config(variant=variant, input=input, report=report)
    total = OpSeqStats()
    lines, invalid = 0, 0
    for number, line in enumerate(_read_lines(config.input), start=1):
        lines += 1
        try:
            total = total + opseq_stats(line.split(), config.variant)
        except OpSeqError as e:
            invalid += 1
            logger.error("line %d: %s", number, e)

    rows = [("Lines", str(lines)), ("Invalid", str(invalid))]
    rows.extend((name, str(value)) for name, value in total.to_dict().items())
    _summary("Operation Statistics", rows)
    if config.report is not None:
        ReportLogger(str(config.report.parent)).write_report(
            {"kind": "stats", "variant": config.variant.value, "lines": lines, "invalid": invalid,
             **total.to_dict()}, str(config.report))


@app.command()
def replay(
    variant: Variant = typer.Option(Variant.RELATIVE, "--variant", "-v", help=_VARIANT_HELP),
    input: Path = typer.Option(..., "--in", "-i", help="Operation-sequence file"),
    timestamps: Optional[Path] = typer.Option(None, "--timestamps", help="Per-token times in ms, one line per stream"),
    output: Path = typer.Option(..., "--out", "-o", help="JSON-lines snapshot dump"),
    strict: bool = typer.Option(False, "--strict", help="Stop at the first bad line"),
):
    """Stream operation sequences token by token and dump the snapshots."""
    configure_logging()
    config = _config(variant=variant, input=input, timestamps=timestamps, output=output, strict=strict)
    lines = _read_lines(config.input)
    times: List[Optional[List[int]]] = [None] * len(lines)
    if config.timestamps is not None:
        time_lines = _read_lines(config.timestamps)
        if len(time_lines) != len(lines):
            _fail(f"{len(time_lines)} timestamp lines for {len(lines)} streams")
        try:
            times = [[int(t) for t in line.split()] for line in time_lines]
        except ValueError as e:
            _fail(f"Bad timestamp: {e}")

    reports = ReportLogger(str(config.output.parent))
    reports.write_jsonl(str(config.output), [])
    errors, lagging = 0, []
    for number, (line, stamps) in enumerate(zip(lines, times), start=1):
        session = StreamSession(config.variant)
        try:
            session.feed_all(line.split(), stamps)
        except OpSeqError as e:
            errors += 1
            logger.error("line %d: %s", number, e)
            if config.strict:
                break
        reports.append_jsonl(str(config.output), ({"line": number, **s.to_dict()} for s in session.snapshots))
        if session.ended and not session.poisoned and session.final().translation:
            lagging.append(average_lagging(session.latency_trace()))

    rows = [("Streams", str(len(lines))), ("Errors", str(errors))]
    if lagging:
        rows.append(("Mean AL (source words)", f"{sum(lagging) / len(lagging):.3f}"))
    _summary("Replay Results", rows)
    if errors and config.strict:
        sys.exit(EXIT_BAD_INPUT)


_TOKEN_ROLES = {
    "[BL]": ("abs", "Separates the source word from its target words"),
    "[EOS]": ("both", "Ends the stream"),
    "[EOP]": ("rel", "Ends a tuple"),
    "[NO_SRC]": ("both", "Source slot of an unaligned target word"),
    "[NO_TGT]": ("both", "Target slot of an unaligned source word"),
    "[NO_OPS]": ("rel", "Empty operation list"),
    "[SM]": ("rel", "Set a marker at the write-head"),
    "[JF]": ("rel", "Jump forward past the next marker"),
    "[JB]": ("rel", "Jump back past the previous marker"),
    "[-1]": ("abs", "Position of a [NO_TGT] entry"),
}


@app.command("list-tokens")
def list_tokens():
    """List the reserved tokens."""
    table = Table(show_header=True)
    table.add_column("Token")
    table.add_column("Variant")
    table.add_column("Meaning")

    for surface in sorted(SPECIAL_SURFACES):
        variant, meaning = _TOKEN_ROLES[surface]
        table.add_row(escape(surface), variant, escape(meaning))
    table.add_row(escape("[n]"), "abs", "Final target position n >= 1")
    table.add_row("##piece", "both", "Continuation piece of the preceding word")

    console.print(table)


if __name__ == "__main__":
    app()
