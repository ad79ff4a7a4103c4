"""Reading raw purchase records and turning them into labeled documents.

A raw record carries up to three free-text description fields plus an
optional 4-digit class code. Records describing services, records without
a class, and records whose description is entirely empty are discarded
before training; discards are normal outcomes and are counted, not raised.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional

log = logging.getLogger(__name__)

CLASS_CODE_RE = re.compile(r"^[0-9]{4}$")

CSV_COLUMNS = ("d1", "d2", "d3", "class", "is_service")


class IngestError(Exception):
    """Fatal ingest problem: unreadable file or unusable header."""


@dataclass(frozen=True)
class RecordError:
    """A single row that could not be parsed; the run continues past it."""

    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass(frozen=True)
class RawRecord:
    """One purchase line, unprocessed apart from surrounding-whitespace strips."""

    description_fields: tuple[str, ...]
    class_code: Optional[str] = None
    is_service: bool = False

    def __post_init__(self) -> None:
        if len(self.description_fields) > 3:
            raise ValueError("at most 3 description fields allowed")
        if self.class_code is not None and not CLASS_CODE_RE.match(self.class_code):
            raise ValueError(f"class code must be 4 decimal digits, got {self.class_code!r}")


@dataclass(frozen=True)
class LabeledDocument:
    """A usable training sample: concatenated description plus its class code."""

    text: str
    class_code: str


@dataclass
class IngestStats:
    """Bookkeeping for one ingest run. read == labeled + discarded always."""

    read: int = 0
    labeled: int = 0
    discarded: int = 0
    errors: int = 0
    discard_reasons: dict[str, int] = field(default_factory=dict)

    def note_discard(self, reason: str) -> None:
        self.discarded += 1
        self.discard_reasons[reason] = self.discard_reasons.get(reason, 0) + 1


def _field_from_json(value: object, key: str, line_no: int) -> Optional[str]:
    if value is None:
        return None
    if not isinstance(value, str):
        raise ValueError(f"key {key!r} must be a string, got {type(value).__name__}")
    return value.strip()


def _class_from_text(raw: Optional[str], line_no: int) -> Optional[str]:
    if raw is None:
        return None
    raw = raw.strip()
    if raw == "":
        return None
    if not CLASS_CODE_RE.match(raw):
        raise ValueError(f"class code must be 4 decimal digits, got {raw!r}")
    return raw


def _record_from_json_line(line: str, line_no: int) -> RawRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ValueError("each line must be a JSON object")
    fields = []
    for key in ("d1", "d2", "d3"):
        if key in obj:
            value = _field_from_json(obj[key], key, line_no)
            if value is not None:
                fields.append(value)
    class_raw = obj.get("class")
    if class_raw is not None and not isinstance(class_raw, str):
        raise ValueError(f"key 'class' must be a string, got {type(class_raw).__name__}")
    class_code = _class_from_text(class_raw, line_no)
    is_service = obj.get("is_service", False)
    if not isinstance(is_service, bool):
        raise ValueError("key 'is_service' must be a boolean")
    return RawRecord(tuple(fields), class_code, is_service)


_TRUTHY = {"true", "1"}
_FALSY = {"false", "0", ""}


def _record_from_csv_row(row: dict[str, str], line_no: int) -> RawRecord:
    fields = tuple((row.get(key) or "").strip() for key in ("d1", "d2", "d3"))
    class_code = _class_from_text(row.get("class"), line_no)
    service_raw = (row.get("is_service") or "").strip().lower()
    if service_raw in _TRUTHY:
        is_service = True
    elif service_raw in _FALSY:
        is_service = False
    else:
        raise ValueError(f"is_service must be true/false, got {service_raw!r}")
    return RawRecord(fields, class_code, is_service)


def read_records(
    path: str | Path,
    format: str,
    on_error: Optional[Callable[[RecordError], None]] = None,
) -> Iterator[RawRecord]:
    """Stream RawRecords from a JSONL or CSV export.

    Malformed rows become RecordErrors delivered to ``on_error`` (or logged
    as warnings when no handler is given) and the run continues. An
    unreadable file or an unusable CSV header is fatal.
    """
    if format not in ("jsonl", "csv"):
        raise IngestError(f"unknown format {format!r}, expected 'jsonl' or 'csv'")

    def report(err: RecordError) -> None:
        if on_error is not None:
            on_error(err)
        else:
            log.warning("skipping record: %s", err)

    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc

    with handle:
        if format == "jsonl":
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    yield _record_from_json_line(line, line_no)
                except ValueError as exc:
                    report(RecordError(line_no, str(exc)))
        else:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None:
                raise IngestError(f"{path}: empty CSV, header row required")
            missing = [c for c in ("d1", "d2", "d3", "class") if c not in reader.fieldnames]
            if missing:
                raise IngestError(f"{path}: CSV header missing columns {missing}")
            for row in reader:
                line_no = reader.line_num
                try:
                    yield _record_from_csv_row(row, line_no)
                except ValueError as exc:
                    report(RecordError(line_no, str(exc)))


def to_labeled(record: RawRecord) -> Optional[LabeledDocument]:
    """Concatenate a record's non-empty fields; None means the record is discarded.

    Discarded: service records, records without a class code, records whose
    description fields are all empty. The join character is a single space
    so words never merge across field boundaries.
    """
    if record.is_service:
        return None
    if record.class_code is None:
        return None
    text = " ".join(f for f in record.description_fields if f)
    if not text:
        return None
    return LabeledDocument(text, record.class_code)


def discard_reason(record: RawRecord) -> Optional[str]:
    """Why to_labeled() would discard this record, or None if it is kept."""
    if record.is_service:
        return "service"
    if record.class_code is None:
        return "missing_class"
    if not any(record.description_fields):
        return "empty_description"
    return None


def load_labeled(
    path: str | Path,
    format: str,
    on_error: Optional[Callable[[RecordError], None]] = None,
) -> tuple[list[LabeledDocument], IngestStats]:
    """Read a file and keep the usable records, in input order."""
    stats = IngestStats()

    def count_error(err: RecordError) -> None:
        stats.errors += 1
        if on_error is not None:
            on_error(err)
        else:
            log.warning("skipping record: %s", err)

    docs: list[LabeledDocument] = []
    for record in read_records(path, format, on_error=count_error):
        stats.read += 1
        reason = discard_reason(record)
        if reason is None:
            labeled = to_labeled(record)
            assert labeled is not None
            docs.append(labeled)
            stats.labeled += 1
        else:
            stats.note_discard(reason)
    return docs, stats


def records_from_iterable(rows: Iterable[RawRecord]) -> tuple[list[LabeledDocument], IngestStats]:
    """Same accounting as load_labeled for records already in memory."""
    stats = IngestStats()
    docs: list[LabeledDocument] = []
    for record in rows:
        stats.read += 1
        reason = discard_reason(record)
        if reason is None:
            labeled = to_labeled(record)
            assert labeled is not None
            docs.append(labeled)
            stats.labeled += 1
        else:
            stats.note_discard(reason)
    return docs, stats
