"""Multifactor user scores, their daily distributions, and summaries of
those distributions (median series, Wasserstein-1 distances, Student-t fit).

A user's score on one day combines their centrality ``x`` with the
sentiment ``S_j`` and retweet count ``R_j`` of each tweet they posted:

    MFS = 1000 * x * sum_j S_j * R_j,     R_j = 1 when no retweets recorded
"""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import optimize, special, stats

from .errors import DegenerateDataError, ParameterError

log = logging.getLogger(__name__)

MFS_COEFFICIENT = 1000.0
STATISTICS = ("median", "mean")


def effective_retweets(count: int) -> int:
    return count if count > 0 else 1


def mfs_user(x: float, tweets: Iterable[tuple], coefficient: float = MFS_COEFFICIENT) -> float:
    """``coefficient * x * sum(S * R)`` over ``(S, R)`` pairs, zero R read as 1."""
    total = 0.0
    for s, r in tweets:
        total += s * effective_retweets(r)
    return coefficient * x * total


@dataclass(frozen=True)
class UserDayScore:
    user_id: int
    day: date
    party: str
    mfs: float


def user_day_scores(buckets: Mapping[date, Sequence], centrality: Mapping,
                    party: str, coefficient: float = MFS_COEFFICIENT) -> list[UserDayScore]:
    """One score per (user, day) for users who posted a ``party`` tweet that day.

    ``centrality`` maps user ID to its PageRank value; users missing from it
    score with centrality 0.
    """
    out = []
    for day in sorted(buckets):
        per_user = defaultdict(list)
        for rec in buckets[day]:
            if party not in rec.party_tags:
                continue
            if rec.sentiment_score is None:
                raise ValueError(f"record {rec.tweet_id} has not been scored")
            per_user[rec.from_user_id].append((rec.sentiment_score, rec.retweet_count))
        for uid in sorted(per_user):
            x = centrality.get(uid, 0.0)
            out.append(UserDayScore(uid, day, party,
                                    mfs_user(x, per_user[uid], coefficient)))
    return out


@dataclass
class DailyDistribution:
    day: date
    party: str
    sample: np.ndarray

    @property
    def empty(self) -> bool:
        return self.sample.size == 0

    def __len__(self):
        return int(self.sample.size)


def daily_distributions(buckets: Mapping[date, Sequence], centrality: Mapping,
                        party: str, days: Iterable[date] | None = None,
                        coefficient: float = MFS_COEFFICIENT) -> list[DailyDistribution]:
    """Per-day samples of user scores for one party.

    With ``days`` given, every listed day gets an entry, empty ones included
    (check ``.empty``).
    """
    grouped = defaultdict(list)
    for s in user_day_scores(buckets, centrality, party, coefficient):
        grouped[s.day].append(s.mfs)
    keys = sorted(days) if days is not None else sorted(grouped)
    out = [DailyDistribution(d, party, np.asarray(grouped.get(d, []), dtype=float))
           for d in keys]
    n_empty = sum(d.empty for d in out)
    if n_empty:
        log.info("%s: %d day(s) without active users", party, n_empty)
    return out


def median(sample) -> float:
    """Middle order statistic; mean of the two central ones for even sizes."""
    a = np.sort(np.asarray(sample, dtype=float).ravel())
    n = a.size
    if n == 0:
        raise DegenerateDataError("median of an empty sample")
    mid = n // 2
    return float(a[mid]) if n % 2 else float(0.5 * (a[mid - 1] + a[mid]))


def _summary(sample, statistic):
    if statistic == "median":
        return median(sample)
    if statistic == "mean":
        if len(sample) == 0:
            raise DegenerateDataError("mean of an empty sample")
        return float(np.mean(sample))
    raise ParameterError(f"unknown statistic {statistic!r}; use one of {STATISTICS}")


@dataclass
class MedianSeries:
    """Daily summary statistic of one party's score distributions.

    Days with an empty sample hold NaN until :func:`interpolate_gaps` fills
    them. ``statistic`` is ``"median"`` unless built otherwise.
    """

    party: str
    days: list
    values: np.ndarray
    sample_sizes: np.ndarray
    statistic: str = "median"

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.days, self.days[1:])):
            raise ValueError("days must be strictly increasing")

    def __len__(self):
        return len(self.days)


def median_series(distributions: Sequence[DailyDistribution],
                  statistic: str = "median") -> MedianSeries:
    if statistic not in STATISTICS:
        raise ParameterError(f"unknown statistic {statistic!r}")
    parties = {d.party for d in distributions}
    if len(parties) > 1:
        raise ValueError(f"distributions mix parties: {sorted(parties)}")
    dists = sorted(distributions, key=lambda d: d.day)
    values = np.array([math.nan if d.empty else _summary(d.sample, statistic)
                       for d in dists])
    return MedianSeries(parties.pop() if parties else "", [d.day for d in dists],
                        values, np.array([len(d) for d in dists]), statistic)


def interpolate_gaps(values) -> tuple[np.ndarray, int]:
    """Linearly interpolate NaNs (edges take the nearest value).

    Returns the filled copy and the number of filled entries.
    """
    v = np.asarray(values, dtype=float).copy()
    bad = np.isnan(v)
    n_bad = int(bad.sum())
    if n_bad == 0:
        return v, 0
    if n_bad == v.size:
        raise DegenerateDataError("series has no observed values")
    idx = np.arange(v.size)
    v[bad] = np.interp(idx[bad], idx[~bad], v[~bad])
    return v, n_bad


# --------------------------------------------------------------------------
# Wasserstein-1

def wasserstein1(a, b) -> float:
    """W1 between two empirical measures with equal point weights.

    Integrates ``|F_a^-1(q) - F_b^-1(q)|`` over ``q`` exactly: with sizes
    ``n`` and ``m`` both quantile functions are constant between the
    breakpoints ``{i/n} U {j/m}``, which are handled as integers on the
    common grid ``1/(n m)``.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    n, m = a.size, b.size
    if n == 0 or m == 0:
        raise DegenerateDataError("Wasserstein distance needs non-empty samples")
    bp = np.union1d(np.arange(n + 1, dtype=np.int64) * m,
                    np.arange(m + 1, dtype=np.int64) * n)
    lo, width = bp[:-1], np.diff(bp)
    diff = np.abs(a[lo // m] - b[lo // n])
    return float(np.dot(width, diff) / (n * m))


def distance_matrix(distributions: Sequence[DailyDistribution]) -> np.ndarray:
    """Symmetric matrix of pairwise W1 distances with a zero diagonal."""
    k = len(distributions)
    for d in distributions:
        if d.empty:
            raise DegenerateDataError(f"empty distribution on {d.day} ({d.party})")
    m = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            m[i, j] = m[j, i] = wasserstein1(distributions[i].sample,
                                             distributions[j].sample)
    return m


# --------------------------------------------------------------------------
# Student-t fit

NU_MIN, NU_MAX = 0.5, 200.0


@dataclass(frozen=True)
class StudentTFit:
    degrees_of_freedom: float
    location: float
    scale: float
    log_likelihood: float
    n: int

    def to_dict(self) -> dict:
        return {"df": self.degrees_of_freedom, "loc": self.location,
                "scale": self.scale, "log_likelihood": self.log_likelihood,
                "n": self.n}


def _nu(z):
    return NU_MIN + (NU_MAX - NU_MIN) * special.expit(z)


def fit_student_t(sample) -> StudentTFit:
    """Maximum-likelihood location-scale Student-t.

    Nelder-Mead over (logit-mapped nu in [0.5, 200], location, log scale),
    restarted from a few tail weights; the best optimum is kept.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 8:
        raise DegenerateDataError(f"Student-t fit needs >= 8 values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DegenerateDataError("sample contains non-finite values")
    if np.ptp(x) == 0:
        raise DegenerateDataError("zero-variance sample")

    loc0 = float(np.median(x))
    scale0 = float(stats.median_abs_deviation(x, scale="normal"))
    if scale0 <= 0:
        scale0 = float(np.std(x))

    n = x.size

    def nll(theta):
        nu, loc, log_s = _nu(theta[0]), theta[1], theta[2]
        z = (x - loc) * math.exp(-log_s)
        ll = n * (special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * nu)
                  - 0.5 * math.log(nu * math.pi) - log_s)
        ll -= 0.5 * (nu + 1) * np.log1p(z * z / nu).sum()
        return -ll if np.isfinite(ll) else np.inf

    best = None
    for nu0 in (2.0, 8.0, 50.0):
        z0 = special.logit((nu0 - NU_MIN) / (NU_MAX - NU_MIN))
        res = optimize.minimize(nll, [z0, loc0, math.log(scale0)],
                                method="Nelder-Mead",
                                options={"xatol": 1e-8, "fatol": 1e-10,
                                         "maxiter": 5000, "maxfev": 10000})
        if best is None or res.fun < best.fun:
            best = res
    z, loc, log_s = best.x
    return StudentTFit(float(_nu(z)), float(loc), float(math.exp(log_s)),
                       float(-best.fun), int(x.size))


# --------------------------------------------------------------------------
# files

def write_series_csv(series: Iterable[MedianSeries], path) -> None:
    """``date,party,median_mfs,sample_size`` (the value column holds the
    configured statistic)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "party", "median_mfs", "sample_size"])
        for s in series:
            for d, v, k in zip(s.days, s.values, s.sample_sizes):
                w.writerow([d.isoformat(), s.party, "" if math.isnan(v) else repr(float(v)),
                            int(k)])


def read_series_csv(path, statistic: str = "median") -> dict[str, MedianSeries]:
    rows = defaultdict(list)
    with open(path, encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            rows[r["party"]].append(r)
    out = {}
    for party, rs in rows.items():
        rs.sort(key=lambda r: r["date"])
        out[party] = MedianSeries(
            party, [date.fromisoformat(r["date"]) for r in rs],
            np.array([math.nan if r["median_mfs"] == "" else float(r["median_mfs"])
                      for r in rs]),
            np.array([int(r["sample_size"]) for r in rs]), statistic)
    return out


def write_matrix_csv(matrix: np.ndarray, labels: Sequence[date], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date"] + [d.isoformat() for d in labels])
        for d, row in zip(labels, matrix):
            w.writerow([d.isoformat()] + [repr(float(v)) for v in row])
