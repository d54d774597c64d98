"""
Dataset — labeled political messages from CSV or JSONL.

Columns / keys: id, author, timestamp (RFC3339), text, label and, optionally,
replies, retweets, likes, views. Invalid rows are skipped with a
line-numbered diagnostic; more than 10% invalid rows aborts the load.
Messages come back in timeline order (timestamp, then id).
"""
import csv
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

import pandas as pd

from backend.errors import DatasetError
from backend.trust_graph import EDGE_SEPARATOR

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("id", "author", "timestamp", "text", "label")
ENGAGEMENT_COLUMNS = ("replies", "retweets", "likes", "views")
MAX_INVALID_FRACTION = 0.10


class IntentLabel(str, Enum):
    ANTI_DEMOCRAT = "anti-democrat"
    ANTI_REPUBLICAN = "anti-republican"
    PRO_DEMOCRAT = "pro-democrat"
    PRO_REPUBLICAN = "pro-republican"
    NEUTRAL = "neutral"


LABELS: Tuple[str, ...] = tuple(label.value for label in IntentLabel)


@dataclass(frozen=True)
class Engagement:
    replies: int = 0
    retweets: int = 0
    likes: int = 0
    views: int = 0


@dataclass(frozen=True)
class LabeledMessage:
    id: str
    author: str
    timestamp: pd.Timestamp
    text: str
    gold: IntentLabel
    engagement: Optional[Engagement] = None


@dataclass
class Dataset:
    messages: List[LabeledMessage]
    total_rows: int
    diagnostics: List[str] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return len(self.diagnostics)


# ── Row parsing ───────────────────────────────────────────────────────────────

def _text(row: Mapping[str, Any], key: str) -> str:
    value = row.get(key)
    return "" if value is None else str(value).strip()


def _timestamp(raw: str) -> pd.Timestamp:
    if not raw:
        raise ValueError("timestamp is empty")
    ts = pd.Timestamp(raw)
    if pd.isna(ts):
        raise ValueError(f"timestamp {raw!r} is not a date")
    return ts.tz_localize("UTC") if ts.tzinfo is None else ts.tz_convert("UTC")


def _engagement(row: Mapping[str, Any]) -> Optional[Engagement]:
    raw = {key: _text(row, key) for key in ENGAGEMENT_COLUMNS}
    if not any(raw.values()):
        return None
    counts = {}
    for key, value in raw.items():
        if not value:
            counts[key] = 0
            continue
        try:
            number = int(float(value))
        except ValueError:
            raise ValueError(f"{key} {value!r} is not a number")
        if number < 0 or number != float(value):
            raise ValueError(f"{key} must be a non-negative integer, got {value!r}")
        counts[key] = number
    return Engagement(**counts)


def parse_row(row: Mapping[str, Any]) -> LabeledMessage:
    """Validate one raw row. Raises ValueError with the reason."""
    message_id = _text(row, "id")
    author = _text(row, "author")
    text = _text(row, "text")
    label = _text(row, "label").lower()
    if not message_id:
        raise ValueError("id is empty")
    if not author:
        raise ValueError("author is empty")
    if EDGE_SEPARATOR in author:
        raise ValueError(f"author {author!r} contains {EDGE_SEPARATOR!r}")
    if not text:
        raise ValueError("text is empty")
    try:
        gold = IntentLabel(label)
    except ValueError:
        raise ValueError(f"label {label!r} is not one of {', '.join(LABELS)}")
    return LabeledMessage(
        id=message_id,
        author=author,
        timestamp=_timestamp(_text(row, "timestamp")),
        text=text,
        gold=gold,
        engagement=_engagement(row),
    )


# ── Readers ───────────────────────────────────────────────────────────────────

def _csv_rows(path: str) -> List[Tuple[int, Dict[str, Any]]]:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise DatasetError(f"dataset not found: {path}")
    except pd.errors.EmptyDataError:
        raise DatasetError(f"dataset {path} is empty")
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DatasetError(f"dataset {path} is not readable CSV: {exc}")

    missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
    if missing:
        raise DatasetError(f"dataset {path} lacks columns: {', '.join(missing)}")
    records = frame.to_dict(orient="records")
    try:
        starts = _record_start_lines(path)
    except csv.Error:
        starts = []
    if len(starts) != len(records):
        logger.debug("[dataset] %s: line map found %d records, pandas %d", path, len(starts), len(records))
        starts = [i + 2 for i in range(len(records))]
    return list(zip(starts, records))


def _record_start_lines(path: str) -> List[int]:
    """First physical line of each data record; quoted fields may span lines."""
    starts = []
    header_seen = False
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        end = 0
        for fields in reader:
            start, end = end + 1, reader.line_num
            if not fields:
                continue
            if header_seen:
                starts.append(start)
            header_seen = True
    return starts


def _jsonl_rows(path: str) -> Tuple[List[Tuple[int, Dict[str, Any]]], List[str]]:
    rows, diagnostics = [], []
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except FileNotFoundError:
        raise DatasetError(f"dataset not found: {path}")
    except UnicodeDecodeError as exc:
        raise DatasetError(f"dataset {path} is not readable: {exc}")

    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            diagnostics.append(f"line {lineno}: malformed JSON ({exc.msg})")
            continue
        if not isinstance(record, dict):
            diagnostics.append(f"line {lineno}: not a JSON object")
            continue
        rows.append((lineno, record))
    return rows, diagnostics


def _validate_rows(path: str, rows: Iterable[Tuple[int, Dict[str, Any]]], diagnostics: List[str]) -> Dataset:
    messages = []
    seen = set()
    total = len(diagnostics)
    for lineno, row in rows:
        total += 1
        try:
            message = parse_row(row)
        except ValueError as exc:
            diagnostics.append(f"line {lineno}: {exc}")
            continue
        if message.id in seen:
            diagnostics.append(f"line {lineno}: duplicate id {message.id!r}")
            continue
        seen.add(message.id)
        messages.append(message)

    if total == 0:
        raise DatasetError(f"dataset {path} is empty")
    if len(diagnostics) > MAX_INVALID_FRACTION * total:
        raise DatasetError(
            f"dataset {path}: {len(diagnostics)} of {total} rows invalid (limit 10%)",
            diagnostics,
        )
    for line in diagnostics:
        logger.warning("[dataset] skipped %s", line)

    messages.sort(key=lambda m: (m.timestamp, m.id))
    return Dataset(messages=messages, total_rows=total, diagnostics=diagnostics)


def ingest(path: str) -> Dataset:
    """Load and validate a dataset. `.jsonl` files are read as JSON lines, anything else as CSV."""
    if path.lower().endswith((".jsonl", ".ndjson")):
        rows, diagnostics = _jsonl_rows(path)
    else:
        rows, diagnostics = _csv_rows(path), []
    return _validate_rows(path, rows, diagnostics)
