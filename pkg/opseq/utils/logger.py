import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional

from rich.logging import RichHandler


def configure_logging(verbose: bool = False) -> None:
    """Route library log records through rich; WARNING by default, DEBUG when verbose."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=verbose)],
        force=True,
    )


def prepare_for_json(obj: Any) -> Any:
    """Recursively convert tuples, sets and numpy values into JSON-friendly values."""
    if isinstance(obj, dict):
        return {k: prepare_for_json(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [prepare_for_json(item) for item in obj]
    elif isinstance(obj, (set, frozenset)):
        return [prepare_for_json(item) for item in sorted(obj)]
    elif hasattr(obj, 'tolist'):  # numpy arrays and scalars
        return obj.tolist()
    else:
        return obj


class ReportLogger:
    """
    Writer for machine-readable job artefacts.

    Single reports go to JSON files, per-record logs (drops, line errors,
    snapshots) to JSON-lines files.
    """

    def __init__(self, log_dir: str):
        """
        Initialize the report logger.

        Args:
            log_dir: The directory where generated reports are saved
        """
        self.log_dir = log_dir
        os.makedirs(log_dir, exist_ok=True)

    def write_report(self, data: Dict[str, Any], path: Optional[str] = None) -> str:
        """
        Write a JSON report.

        Args:
            data: The report content
            path: Target file; defaults to a timestamped file in log_dir named after data["kind"]

        Returns:
            The path of the written file
        """
        if path is None:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
            path = os.path.join(self.log_dir, f"{timestamp}_{data.get('kind', 'report')}.json")
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)

        with open(path, 'w', encoding="utf-8") as f:
            json.dump(prepare_for_json(data), f, indent=2, ensure_ascii=False)
        return path

    def write_jsonl(self, path: str, records: Iterable[Dict[str, Any]]) -> int:
        """Write records to a fresh JSON-lines file; return how many were written."""
        return self._dump_lines(path, records, 'w')

    def append_jsonl(self, path: str, records: Iterable[Dict[str, Any]]) -> int:
        """Append records to a JSON-lines file; return how many were written."""
        return self._dump_lines(path, records, 'a')

    @staticmethod
    def _dump_lines(path: str, records: Iterable[Dict[str, Any]], mode: str) -> int:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        count = 0
        with open(path, mode, encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(prepare_for_json(record), ensure_ascii=False) + "\n")
                count += 1
        return count

    @staticmethod
    def read_report(path: str) -> Dict[str, Any]:
        with open(path, 'r', encoding="utf-8") as f:
            return json.load(f)

    @staticmethod
    def read_jsonl(path: str) -> List[Dict[str, Any]]:
        with open(path, 'r', encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
