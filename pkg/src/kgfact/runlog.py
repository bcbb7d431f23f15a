"""Run-log persistence: one canonical-JSON line per scored question.

The writer accepts records in any completion order but writes them to disk
densely ordered by question_index, so a log file is always a dense prefix
of the run. That makes resume trivial (count the lines) and keeps repeated
fixture runs byte-identical regardless of worker scheduling.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from kgfact.difficulty import CalibrationRecord
from kgfact.errors import SchemaMismatch
from kgfact.kg.types import EntityStatistics
from kgfact.metrics import QuestionOutcome
from kgfact.util import canonical_json
from kgfact.verification import EntityClassification

REQUIRED_KEYS = (
    "question_index",
    "question",
    "response",
    "entity_verdict",
    "fact_verdicts",
    "score",
    "difficulty",
)


class RunLogWriter:
    """Thread-safe JSONL sink ordered by question index."""

    def __init__(self, path: str | Path, start_index: int = 0):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "a", encoding="utf-8")
        self._next = start_index
        self._pending: dict[int, str] = {}
        self._lock = threading.Lock()

    def write(self, record: dict[str, Any]) -> None:
        index = record["question_index"]
        line = canonical_json(record)
        with self._lock:
            if index < self._next or index in self._pending:
                raise ValueError(f"duplicate question_index {index}")
            self._pending[index] = line
            while self._next in self._pending:
                self._file.write(self._pending.pop(self._next) + "\n")
                self._next += 1
            self._file.flush()

    @property
    def pending_count(self) -> int:
        with self._lock:
            return len(self._pending)

    def close(self) -> None:
        with self._lock:
            if self._pending:
                raise ValueError(
                    f"closing with {len(self._pending)} records stranded above a gap at {self._next}"
                )
            self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        try:
            self.close()
        except ValueError:
            # Preserve the original error; a gap at close means the run
            # already failed and the dense prefix on disk is the artifact.
            self._file.close()
            if exc_type is None:
                raise


def read_run_log(path: str | Path, allow_partial_tail: bool = False) -> list[dict[str, Any]]:
    """Parse a run log, enforcing dense unique indices.

    allow_partial_tail tolerates one truncated final line (a crash
    artifact) by dropping it; any other defect raises SchemaMismatch with
    the offending line number.
    """
    path = Path(path)
    records: list[dict[str, Any]] = []
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, start=1):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            if allow_partial_tail and lineno == len(lines):
                break
            raise SchemaMismatch(str(path), lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise SchemaMismatch(str(path), lineno, "record is not an object")
        missing = [k for k in REQUIRED_KEYS if k not in record]
        if missing:
            raise SchemaMismatch(str(path), lineno, f"missing keys: {', '.join(missing)}")
        expected = lineno - 1
        if record["question_index"] != expected:
            raise SchemaMismatch(
                str(path),
                lineno,
                f"question_index {record['question_index']!r}, expected {expected}",
            )
        records.append(record)
    return records


# -- record parsing ---------------------------------------------------------


def _mismatch(path: str, record: dict, message: str) -> SchemaMismatch:
    line = int(record.get("question_index", -1)) + 1
    return SchemaMismatch(path, line, message)


def record_outcome(record: dict[str, Any], path: str = "<log>") -> QuestionOutcome:
    """The metrics-relevant slice of one log record."""
    try:
        classification = EntityClassification(record["entity_verdict"]["classification"])
        points = int(record["score"]["points"])
        q_d = float(record["difficulty"]["final_q_d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise _mismatch(path, record, f"unreadable outcome fields: {exc}") from exc
    return QuestionOutcome(classification=classification, points=points, q_d=q_d)


def record_calibration(record: dict[str, Any], path: str = "<log>") -> CalibrationRecord:
    """The calibration-relevant slice of one log record."""
    try:
        question = record["question"]
        type_id = question["focal"]["type_id"]
        relation_ids = tuple(t["relation_id"] for t in question["triples"])
        score = int(record["score"]["points"])
        q_d = float(record["difficulty"]["final_q_d"])
        raw_stats = question["focal"].get("statistics")
        stats = EntityStatistics(*raw_stats) if raw_stats else None
    except (KeyError, TypeError, ValueError) as exc:
        raise _mismatch(path, record, f"unreadable calibration fields: {exc}") from exc
    return CalibrationRecord(
        type_id=type_id,
        relation_ids=relation_ids,
        question_score=score,
        q_d=q_d,
        stats=stats,
    )
