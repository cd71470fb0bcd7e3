"""Additive lexicon sentiment scoring and polarity counts."""

from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import InputError

log = logging.getLogger(__name__)

POSITIVE, NEGATIVE, NEUTRAL = "positive", "negative", "neutral"

# Alphanumeric runs; a leading # or @ stays attached to the token.
_TOKEN = re.compile(r"[#@]?[^\W_]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


class Lexicon(dict):
    """Lowercase token -> score."""

    def score(self, text: str) -> float:
        return score_tweet(text, self)


def parse_lexicon(lines: Iterable[str], source: str = "<lexicon>") -> Lexicon:
    lex = Lexicon()
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip():
            raise InputError(f"{source}:{lineno}: expected token<TAB>score")
        token = parts[0].strip().lower()
        try:
            value = float(parts[1])
        except ValueError:
            raise InputError(
                f"{source}:{lineno}: unparseable score {parts[1]!r}") from None
        if not math.isfinite(value):
            raise InputError(f"{source}:{lineno}: score must be finite")
        if token in lex:
            log.warning("%s:%d: duplicate token %r, last value wins",
                        source, lineno, token)
        lex[token] = value
    return lex


def load_lexicon(path=None) -> Lexicon:
    """Read a ``token<TAB>score`` file. ``None`` loads the bundled test lexicon."""
    if path is None:
        text = resources.files("mfelect.data").joinpath(
            "test_lexicon.tsv").read_text(encoding="utf-8")
        return parse_lexicon(text.splitlines(), "test_lexicon.tsv")
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_lexicon(fh, str(path))
    except OSError as exc:
        raise InputError(f"cannot read lexicon {path}: {exc}") from exc


def score_tweet(text: str, lexicon: Mapping[str, float]) -> float:
    """Sum of per-token scores; unknown tokens count zero."""
    return float(sum(lexicon.get(tok, 0.0) for tok in tokenize(text)))


def classify_polarity(score: float) -> str:
    if score > 0:
        return POSITIVE
    if score < 0:
        return NEGATIVE
    return NEUTRAL


def score_records(records, lexicon: Mapping[str, float]):
    """Fill ``sentiment_score`` on every record in place; returns the records."""
    for rec in records:
        rec.sentiment_score = score_tweet(rec.text, lexicon)
    return records


@dataclass(frozen=True)
class PartyCounts:
    party: str
    total: int
    positive: int
    negative: int
    neutral: int

    def __post_init__(self):
        if min(self.total, self.positive, self.negative, self.neutral) < 0:
            raise ValueError("counts must be non-negative")
        if self.positive + self.negative + self.neutral != self.total:
            raise ValueError(
                f"{self.party}: positive + negative + neutral != total")

    def share(self, polarity: str) -> float:
        """Fraction of the party's tweets with the given polarity (0 if empty)."""
        if self.total == 0:
            return 0.0
        return getattr(self, polarity) / self.total

    def percentages(self) -> dict[str, float]:
        return {k: 100.0 * self.share(k) for k in (POSITIVE, NEGATIVE, NEUTRAL)}

    def scaled(self, factor: int) -> "PartyCounts":
        return PartyCounts(self.party, self.total * factor, self.positive * factor,
                           self.negative * factor, self.neutral * factor)


def party_counts(party: str, scores: Iterable[float]) -> PartyCounts:
    """Polarity tally of one party's scored tweets."""
    tally = {POSITIVE: 0, NEGATIVE: 0, NEUTRAL: 0}
    for s in scores:
        tally[classify_polarity(s)] += 1
    return PartyCounts(party, sum(tally.values()), **tally)


def counts_by_party(records, parties: Iterable[str]) -> dict[str, PartyCounts]:
    """Tally scored, party-tagged records; a record counts for each of its tags."""
    parties = list(parties)
    scores = {p: [] for p in parties}
    for rec in records:
        if rec.sentiment_score is None:
            raise ValueError(f"record {rec.tweet_id} has not been scored")
        for p in rec.party_tags:
            if p in scores:
                scores[p].append(rec.sentiment_score)
    return {p: party_counts(p, scores[p]) for p in parties}


COUNT_FIELDS = ("party", "total", "positive", "negative", "neutral")


def write_counts_csv(counts: Iterable[PartyCounts], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COUNT_FIELDS + ("pct_positive", "pct_negative", "pct_neutral"))
        for c in counts:
            pct = c.percentages()
            w.writerow([c.party, c.total, c.positive, c.negative, c.neutral,
                        f"{pct[POSITIVE]:.4f}", f"{pct[NEGATIVE]:.4f}",
                        f"{pct[NEUTRAL]:.4f}"])


def read_counts_csv(path=None) -> dict[str, PartyCounts]:
    """Read a counts table. ``None`` loads the bundled US 2020 tallies."""
    if path is None:
        text = resources.files("mfelect.data").joinpath(
            "counts_us2020.csv").read_text(encoding="utf-8")
        rows = list(csv.DictReader(text.splitlines()))
    else:
        try:
            with open(Path(path), encoding="utf-8", newline="") as fh:
                rows = list(csv.DictReader(fh))
        except OSError as exc:
            raise InputError(f"cannot read counts {path}: {exc}") from exc
    try:
        return {r["party"]: PartyCounts(r["party"], int(r["total"]),
                                        int(r["positive"]), int(r["negative"]),
                                        int(r["neutral"]))
                for r in rows}
    except (KeyError, ValueError) as exc:
        raise InputError(f"malformed counts table: {exc}") from exc
