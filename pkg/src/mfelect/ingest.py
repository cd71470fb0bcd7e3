"""Tweet corpus parsing, keyword-based party tagging and daily bucketing.

Records arrive as newline-delimited JSON objects (or a CSV file with the
same header names)::

    {"tweet_id": "17", "from_user_id": 5, "to_user_id": -1,
     "text": "Biden rally tonight", "retweet_count": 3,
     "timestamp": "2020-09-01T12:00:00Z"}

``to_user_id == -1`` marks a tweet that is not addressed to another user.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import InputError, ParameterError

log = logging.getLogger(__name__)

NO_TARGET = -1
REQUIRED_FIELDS = ("tweet_id", "from_user_id", "to_user_id", "text",
                   "retweet_count", "timestamp")
PATTERN_KINDS = ("hashtag", "mention", "phrase", "word")
# Entries under this key in a keyword file are collection-only keywords,
# not a party.
COLLECTION_KEY = "_collection"


@dataclass
class TweetRecord:
    tweet_id: str
    from_user_id: int
    to_user_id: int
    text: str
    retweet_count: int
    timestamp: datetime
    party_tags: frozenset = frozenset()
    sentiment_score: float | None = None

    @property
    def day(self) -> date:
        return self.timestamp.astimezone(timezone.utc).date()

    @property
    def is_direct(self) -> bool:
        return self.to_user_id >= 1

    def to_dict(self) -> dict:
        d = {
            "tweet_id": self.tweet_id,
            "from_user_id": self.from_user_id,
            "to_user_id": self.to_user_id,
            "text": self.text,
            "retweet_count": self.retweet_count,
            "timestamp": format_timestamp(self.timestamp),
        }
        if self.party_tags:
            d["party_tags"] = sorted(self.party_tags)
        if self.sentiment_score is not None:
            d["sentiment_score"] = self.sentiment_score
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def parse_timestamp(value) -> datetime:
    if isinstance(value, datetime):
        ts = value
    else:
        s = str(value).strip()
        if s.endswith(("Z", "z")):
            s = s[:-1] + "+00:00"
        ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    ts = ts.astimezone(timezone.utc)
    if ts.microsecond:
        return ts.strftime("%Y-%m-%dT%H:%M:%S.%fZ")
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def _as_int(value, name):
    if isinstance(value, bool):
        raise ValueError(f"{name} must be an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"{name} must be an integer")
        return int(value)
    return int(str(value).strip())


def record_from_dict(obj: Mapping) -> TweetRecord:
    """Validate one raw object. Raises ValueError on any contract breach.

    A record whose target equals its author keeps its text but loses the
    interaction (``to_user_id`` becomes -1).
    """
    missing = [f for f in REQUIRED_FIELDS if obj.get(f) in (None, "")
               and not (f == "text" and obj.get(f) == "")]
    if missing:
        raise ValueError(f"missing field(s): {', '.join(missing)}")
    from_id = _as_int(obj["from_user_id"], "from_user_id")
    to_id = _as_int(obj["to_user_id"], "to_user_id")
    rt = _as_int(obj["retweet_count"], "retweet_count")
    if from_id < 1:
        raise ValueError("from_user_id must be >= 1")
    if to_id != NO_TARGET and to_id < 1:
        raise ValueError("to_user_id must be -1 or >= 1")
    if rt < 0:
        raise ValueError("retweet_count must be >= 0")
    text = obj["text"]
    if not isinstance(text, str):
        raise ValueError("text must be a string")
    tags = obj.get("party_tags") or ()
    score = obj.get("sentiment_score")
    return TweetRecord(
        tweet_id=str(obj["tweet_id"]),
        from_user_id=from_id,
        to_user_id=NO_TARGET if to_id == from_id else to_id,
        text=text,
        retweet_count=rt,
        timestamp=parse_timestamp(obj["timestamp"]),
        party_tags=frozenset(tags),
        sentiment_score=None if score in (None, "") else float(score),
    )


@dataclass
class ParseResult:
    records: list
    malformed: int = 0
    duplicates: int = 0
    self_messages: int = 0
    warnings: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def parse_tweet_stream(lines: Iterable[str], fmt: str = "jsonl") -> ParseResult:
    """Parse a record stream, skipping (and counting) malformed lines.

    Records come back in input order. When a ``tweet_id`` repeats, the last
    occurrence wins and takes the position of the first.
    """
    if fmt not in ("jsonl", "csv"):
        raise ParameterError(f"unknown record format {fmt!r}")
    by_id: dict[str, TweetRecord] = {}
    result = ParseResult(records=[])

    if fmt == "csv":
        raw_iter = _csv_rows(lines)
    else:
        raw_iter = _json_rows(lines)

    for lineno, obj in raw_iter:
        if obj is None:
            result.malformed += 1
            result.warnings.append(f"line {lineno}: not a JSON object")
            continue
        try:
            rec = record_from_dict(obj)
        except (ValueError, TypeError, KeyError) as exc:
            result.malformed += 1
            result.warnings.append(f"line {lineno}: {exc}")
            continue
        if rec.to_user_id == NO_TARGET and _raw_to(obj) == rec.from_user_id:
            result.self_messages += 1
        if rec.tweet_id in by_id:
            result.duplicates += 1
        by_id[rec.tweet_id] = rec

    result.records = list(by_id.values())
    if result.malformed:
        log.warning("skipped %d malformed record(s)", result.malformed)
    if result.duplicates:
        log.warning("%d duplicate tweet_id(s); last occurrence kept",
                    result.duplicates)
    return result


def _raw_to(obj):
    try:
        return _as_int(obj["to_user_id"], "to_user_id")
    except (ValueError, TypeError):
        return None


def _json_rows(lines):
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            yield lineno, None
            continue
        yield lineno, obj if isinstance(obj, dict) else None


def _csv_rows(lines):
    reader = csv.DictReader(lines)
    for lineno, row in enumerate(reader, 2):
        if None in row:  # more cells than header names
            yield lineno, None
            continue
        yield lineno, row


def read_records(path, fmt: str | None = None) -> ParseResult:
    """Parse a corpus file; the format follows the suffix unless given."""
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return parse_tweet_stream(fh, fmt=fmt)
    except OSError as exc:
        raise InputError(f"cannot read corpus {path}: {exc}") from exc


def write_records(records: Iterable[TweetRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")


# --------------------------------------------------------------------------
# keyword table

@dataclass(frozen=True)
class KeywordPattern:
    kind: str
    value: str

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ParameterError(f"unknown keyword kind {self.kind!r}")
        if not self.value.strip():
            raise ParameterError("empty keyword pattern")

    def regex(self) -> str:
        v = self.value.strip()
        if self.kind in ("hashtag", "mention"):
            sigil = "#" if self.kind == "hashtag" else "@"
            body = v.lstrip("#@")
            return rf"(?<![\w#@]){re.escape(sigil + body)}(?!\w)"
        if self.kind == "word":
            return rf"(?<!\w){re.escape(v)}(?!\w)"
        return re.escape(v)


class KeywordTable:
    """Party -> keyword patterns, compiled to one regex per party."""

    def __init__(self, entries: Mapping[str, Iterable[KeywordPattern]],
                 collection: Iterable[KeywordPattern] = ()):
        self.entries = {p: tuple(pats) for p, pats in entries.items()}
        self.collection = tuple(collection)
        for party, pats in self.entries.items():
            if not pats:
                raise ParameterError(f"party {party!r} has no keyword patterns")
        self._compiled = {
            party: re.compile("|".join(p.regex() for p in pats), re.IGNORECASE)
            for party, pats in self.entries.items()
        }

    @property
    def parties(self) -> list[str]:
        return list(self.entries)

    @classmethod
    def from_mapping(cls, data: Mapping) -> "KeywordTable":
        entries, collection = {}, ()
        for name, items in data.items():
            pats = [KeywordPattern(str(it["kind"]), str(it["value"]))
                    for it in items]
            if name == COLLECTION_KEY:
                collection = pats
            else:
                entries[name] = pats
        return cls(entries, collection)

    @classmethod
    def load(cls, path=None) -> "KeywordTable":
        """Load a keyword JSON file; ``None`` gives the bundled US 2020 table."""
        try:
            if path is None:
                text = resources.files("mfelect.data").joinpath(
                    "keywords.json").read_text(encoding="utf-8")
            else:
                text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read keyword table {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"keyword table is not valid JSON: {exc}") from exc
        return cls.from_mapping(data)

    def match(self, text: str) -> frozenset:
        if not text:
            return frozenset()
        return frozenset(p for p, rx in self._compiled.items() if rx.search(text))


def match_party(text: str, table: KeywordTable) -> frozenset:
    """Every party with at least one matching keyword (case-insensitive)."""
    return table.match(text)


def tag_records(records: Iterable[TweetRecord], table: KeywordTable,
                drop_multiparty: bool = False) -> list[TweetRecord]:
    """Fill ``party_tags``. Untagged records are dropped.

    With ``drop_multiparty`` records matching more than one party are
    dropped instead of being counted for each of them.
    """
    out = []
    for rec in records:
        tags = table.match(rec.text)
        if not tags or (drop_multiparty and len(tags) > 1):
            continue
        rec.party_tags = tags
        out.append(rec)
    return out


# --------------------------------------------------------------------------
# windowing

@dataclass(frozen=True)
class AnalysisWindow:
    start_day: date
    end_day: date

    def __post_init__(self):
        if self.start_day > self.end_day:
            raise ParameterError(
                f"window start {self.start_day} is after end {self.end_day}")

    @classmethod
    def parse(cls, text: str) -> "AnalysisWindow":
        """``"2020-09-01:2020-11-02"`` -> window (both ends inclusive)."""
        try:
            a, b = text.split(":")
            return cls(date.fromisoformat(a.strip()), date.fromisoformat(b.strip()))
        except ValueError as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"bad window {text!r}; expected START:END") from exc

    def __contains__(self, day: date) -> bool:
        return self.start_day <= day <= self.end_day

    def days(self) -> list[date]:
        n = (self.end_day - self.start_day).days + 1
        return [date.fromordinal(self.start_day.toordinal() + i) for i in range(n)]

    def __len__(self):
        return (self.end_day - self.start_day).days + 1

    def __str__(self):
        return f"{self.start_day.isoformat()}:{self.end_day.isoformat()}"


def bucket_by_day(records: Iterable[TweetRecord],
                  window: AnalysisWindow) -> dict[date, list[TweetRecord]]:
    """UTC calendar-day buckets; records outside the window are dropped.

    Keys are sorted; days without records get no key.
    """
    buckets = defaultdict(list)
    for rec in records:
        d = rec.day
        if d in window:
            buckets[d].append(rec)
    return dict(sorted(buckets.items()))

