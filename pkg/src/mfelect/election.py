"""Vote-share estimates and their evaluation.

The multifactor estimate maps two party forecasts onto a two-party split
around 50/50. Three count-based baselines are provided for comparison:

* ``actual_sentiment``   (pos - neg) / (T_A + T_B), rescaled to sum to 100
* ``popularity``         pos / (pos + neg) * T_X / (T_A + T_B), not rescaled
* ``cross_negative``     (pos_A + neg_B) / (pos + neg over both parties)

All values are percentages, kept at full precision; round only for display.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import DegenerateDataError, InputError, ParameterError
from .sentiment import PartyCounts


@dataclass(frozen=True)
class VoteShares:
    """Party -> percentage points, with optional method metadata."""

    shares: dict
    method: str = ""
    raw: dict | None = None
    notes: tuple = ()

    def __getitem__(self, party):
        return self.shares[party]

    def __iter__(self):
        return iter(self.shares)

    @property
    def parties(self) -> list:
        return list(self.shares)

    @property
    def total(self) -> float:
        return float(sum(self.shares.values()))

    def to_dict(self) -> dict:
        d = {"method": self.method, "shares": dict(self.shares), "total": self.total}
        if self.raw is not None:
            d["raw"] = dict(self.raw)
        if self.notes:
            d["notes"] = list(self.notes)
        return d


@dataclass(frozen=True)
class ReferenceResults:
    actual: VoteShares
    polls: VoteShares
    label: str = ""

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ReferenceResults":
        try:
            actual = {k: float(v) for k, v in data["actual"].items()}
            polls = {k: float(v) for k, v in data["polls"].items()}
        except (KeyError, AttributeError, TypeError, ValueError) as exc:
            raise InputError(f"reference results need 'actual' and 'polls': {exc}") from exc
        return cls(VoteShares(actual, "actual"), VoteShares(polls, "polls"),
                   str(data.get("election", "")))

    @classmethod
    def load(cls, path=None) -> "ReferenceResults":
        """Read a reference JSON file; ``None`` gives the bundled US 2020 values."""
        try:
            if path is None:
                text = resources.files("mfelect.data").joinpath(
                    "reference_us2020.json").read_text(encoding="utf-8")
            else:
                text = Path(path).read_text(encoding="utf-8")
            return cls.from_mapping(json.loads(text))
        except OSError as exc:
            raise InputError(f"cannot read reference results {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"reference results are not valid JSON: {exc}") from exc


def vote_share_from_forecasts(f_a: float, f_b: float, party_a: str = "Democratic",
                              party_b: str = "Republican") -> VoteShares:
    """Read ``100 * (f_a - f_b)`` as the percentage-point gap and split it
    symmetrically around 50."""
    gap = 100.0 * (f_a - f_b)
    return VoteShares({party_a: 50.0 + gap / 2.0, party_b: 50.0 - gap / 2.0},
                      "multifactor")


def _pair(a: PartyCounts, b: PartyCounts):
    if a.party == b.party:
        raise ParameterError("baselines need two distinct parties")
    return a.party, b.party


def baseline_actual_sentiment(a: PartyCounts, b: PartyCounts) -> VoteShares:
    """Net sentiment over all tweets, normalized so the two shares sum to 100.

    ``raw`` holds the un-normalized percentages.
    """
    pa, pb = _pair(a, b)
    total = a.total + b.total
    if total == 0:
        raise DegenerateDataError("no tweets for either party")
    raw_a = (a.positive - a.negative) / total
    raw_b = (b.positive - b.negative) / total
    s = raw_a + raw_b
    if s == 0:
        raise DegenerateDataError("net sentiment sums to zero; cannot normalize")
    return VoteShares({pa: 100.0 * raw_a / s, pb: 100.0 * raw_b / s},
                      "actual_sentiment",
                      raw={pa: 100.0 * raw_a, pb: 100.0 * raw_b},
                      notes=("raw shares rescaled by their sum",))


def baseline_popularity(a: PartyCounts, b: PartyCounts) -> VoteShares:
    pa, pb = _pair(a, b)
    total = a.total + b.total
    out = {}
    for c in (a, b):
        polar = c.positive + c.negative
        if polar == 0:
            raise DegenerateDataError(f"{c.party}: no positive or negative tweets")
        out[c.party] = 100.0 * (c.positive / polar) * (c.total / total)
    return VoteShares(out, "popularity")


def baseline_cross_negative(a: PartyCounts, b: PartyCounts) -> VoteShares:
    """A party's positive tweets plus the rival's negative ones, over all
    polar tweets (neutral tweets excluded from the denominator)."""
    pa, pb = _pair(a, b)
    denom = a.positive + a.negative + b.positive + b.negative
    if denom == 0:
        raise DegenerateDataError("no positive or negative tweets")
    return VoteShares({pa: 100.0 * (a.positive + b.negative) / denom,
                       pb: 100.0 * (b.positive + a.negative) / denom},
                      "cross_negative",
                      notes=("denominator excludes neutral tweets",))


BASELINES = {
    "actual_sentiment": baseline_actual_sentiment,
    "popularity": baseline_popularity,
    "cross_negative": baseline_cross_negative,
}


@dataclass(frozen=True)
class MAEResult:
    errors: dict
    mean: float
    method: str = ""

    def to_dict(self) -> dict:
        return {"method": self.method, "errors": dict(self.errors), "mean": self.mean}


def mae(predicted: VoteShares | Mapping, actual: VoteShares | Mapping) -> MAEResult:
    """Per-party absolute errors (percentage points) and their mean."""
    pred = predicted.shares if isinstance(predicted, VoteShares) else dict(predicted)
    act = actual.shares if isinstance(actual, VoteShares) else dict(actual)
    if set(pred) != set(act):
        raise ParameterError(
            f"party mismatch: predicted {sorted(pred)} vs actual {sorted(act)}")
    if not pred:
        raise ParameterError("no parties to compare")
    errors = {p: abs(pred[p] - act[p]) for p in act}
    return MAEResult(errors, sum(errors.values()) / len(errors),
                     getattr(predicted, "method", ""))


@dataclass
class EvaluationReport:
    """Method x party share matrix plus MAE rows against the actual result."""

    parties: list
    methods: dict = field(default_factory=dict)  # name -> VoteShares
    reference: ReferenceResults | None = None

    def add(self, name: str, shares: VoteShares) -> None:
        self.methods[name] = shares

    def errors(self) -> dict:
        return {name: mae(s, self.reference.actual) for name, s in self.methods.items()
                if name != "actual"}

    def to_dict(self) -> dict:
        return {
            "parties": self.parties,
            "shares": {k: v.to_dict() for k, v in self.methods.items()},
            "mae": {k: v.to_dict() for k, v in self.errors().items()},
        }

    def write_csv(self, shares_path, mae_path, digits: int | None = None) -> None:
        fmt = (lambda v: repr(float(v))) if digits is None else (lambda v: f"{v:.{digits}f}")
        names = list(self.methods)
        with open(shares_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["party"] + names)
            for p in self.parties:
                w.writerow([p] + [fmt(self.methods[m][p]) for m in names])
            w.writerow(["Total"] + [fmt(self.methods[m].total) for m in names])
        errs = self.errors()
        with open(mae_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["party"] + list(errs))
            for p in self.parties:
                w.writerow([p] + [fmt(e.errors[p]) for e in errs.values()])
            w.writerow(["Mean"] + [fmt(e.mean) for e in errs.values()])


def evaluate(counts: Mapping[str, PartyCounts], forecasts: Mapping[str, float] | None,
             reference: ReferenceResults, parties=("Democratic", "Republican"),
             baselines=tuple(BASELINES)) -> EvaluationReport:
    """Assemble the comparison: multifactor (if forecasts are given), polls,
    the selected baselines, and the actual result."""
    pa, pb = parties
    report = EvaluationReport(list(parties), reference=reference)
    if forecasts is not None:
        report.add("multifactor", vote_share_from_forecasts(forecasts[pa], forecasts[pb],
                                                            pa, pb))
    report.add("polls", reference.polls)
    for name in baselines:
        if name not in BASELINES:
            raise ParameterError(f"unknown baseline {name!r}")
        report.add(name, BASELINES[name](counts[pa], counts[pb]))
    report.add("actual", reference.actual)
    return report
