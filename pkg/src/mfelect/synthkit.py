"""Synthetic tweet corpora with a planted party-popularity trend.

Each party has a net favourability ``pop(t) = intercept + slope * t / (n_days - 1)``
in [-1, 1] over the window. On day ``t`` a tweet about the party is neutral
with the party's base neutral probability and otherwise positive with
probability ``(1 + pop(t)) / 2``. Texts embed one party keyword and, for
polar tweets, one word from the bundled test lexicon, so tagging and
scoring recover the intended labels exactly.

Direct-message targets are drawn by preferential attachment on received
messages; retweet counts follow a capped discrete power law.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import ParameterError

POSITIVE_WORDS = ("good", "great", "love", "hope", "win", "strong", "honest", "proud")
NEGATIVE_WORDS = ("bad", "terrible", "hate", "fear", "lose", "weak", "corrupt", "liar")
FILLER_WORDS = ("the", "debate", "tonight", "rally", "vote", "news", "today", "policy",
                "speech", "campaign", "people", "state", "watch", "said", "again")
PARTY_KEYWORDS = {
    "Democratic": ("Biden", "@JoeBiden", "@TheDemocrats", "@DNC"),
    "Republican": ("Trump", "@realDonaldTrump", "@GOP", "#MAGA2020", "Pence"),
    "Green": ("@GreenPartyUS", "Howie Hawkins"),
    "Libertarian": ("@LPNational", "Jo Jorgensen"),
}
TIE = "tie"


@dataclass
class CorpusSpec:
    n_users: int = 10_000
    n_days: int = 63
    start_day: str = "2020-09-01"
    tweets_per_day: int = 1500
    party_volume: dict = field(default_factory=lambda: {"Democratic": 0.35,
                                                        "Republican": 0.65})
    # party -> [intercept, slope]; omitted parties use their sentiment_mix as is
    party_popularity: dict = field(default_factory=lambda: {
        "Democratic": [0.05, 0.15], "Republican": [-0.05, -0.15]})
    # party -> [p_pos, p_neg, p_neu]
    sentiment_mix: dict = field(default_factory=lambda: {
        "Democratic": [0.43, 0.43, 0.14], "Republican": [0.40, 0.53, 0.07]})
    interaction_rate: float = 0.3
    retweet_exponent: float = 2.5
    retweet_cap: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.n_users < 1 or self.n_days < 1:
            raise ParameterError("n_users and n_days must be >= 1")
        if self.tweets_per_day < 0:
            raise ParameterError("tweets_per_day must be >= 0")
        if not 0.0 <= self.interaction_rate <= 1.0:
            raise ParameterError("interaction_rate must be in [0, 1]")
        if self.retweet_exponent <= 1.0:
            raise ParameterError("retweet_exponent must be > 1")
        vol = np.array(list(self.party_volume.values()), dtype=float)
        if vol.size == 0 or np.any(vol < 0) or not np.isclose(vol.sum(), 1.0):
            raise ParameterError("party_volume must be probabilities summing to 1")
        for party in self.party_volume:
            if party not in PARTY_KEYWORDS:
                raise ParameterError(f"no synthetic keywords for party {party!r}")
            mix = self.sentiment_mix.get(party)
            if mix is None or len(mix) != 3:
                raise ParameterError(f"{party}: sentiment_mix needs 3 probabilities")
            if min(mix) < 0 or max(mix) > 1 or not np.isclose(sum(mix), 1.0):
                raise ParameterError(f"{party}: sentiment_mix must sum to 1")
        for party, (a, b) in self.party_popularity.items():
            if party not in self.party_volume:
                raise ParameterError(f"popularity for unknown party {party!r}")
            if not (-1 <= a <= 1 and -1 <= a + b <= 1):
                raise ParameterError(f"{party}: popularity must stay in [-1, 1]")
        date.fromisoformat(self.start_day)

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusSpec":
        return cls(**d)

    @classmethod
    def load(cls, path) -> "CorpusSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def parties(self) -> list:
        return list(self.party_volume)

    def popularity(self, party: str, t) -> np.ndarray:
        """Planted net favourability of ``party`` on day index ``t``."""
        t = np.asarray(t, dtype=float)
        if party in self.party_popularity:
            a, b = self.party_popularity[party]
            frac = t / (self.n_days - 1) if self.n_days > 1 else np.ones_like(t)
            return a + b * frac
        pos, neg, neu = self.sentiment_mix[party]
        polar = pos + neg
        return np.full_like(t, (pos - neg) / polar if polar else 0.0)

    def mix(self, party: str, t: int) -> tuple[float, float, float]:
        pos, neg, neu = self.sentiment_mix[party]
        if party not in self.party_popularity:
            return pos, neg, neu
        pop = float(self.popularity(party, t))
        return (1 - neu) * (1 + pop) / 2, (1 - neu) * (1 - pop) / 2, neu


@dataclass
class SyntheticCorpus:
    lines: list
    tallies: dict  # party -> {"total", "positive", "negative", "neutral"}
    spec: CorpusSpec

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.text())


def _retweets(rng, n, exponent, cap):
    # P(R = k) proportional to (k + 1)^-exponent, k >= 0
    r = rng.zipf(exponent, size=n) - 1
    return np.minimum(r, cap)


def generate_corpus(spec: CorpusSpec) -> SyntheticCorpus:
    """Deterministic corpus for ``spec.seed`` in the ingest JSON-lines format."""
    rng = np.random.default_rng(spec.seed)
    parties = spec.parties
    volume = np.array([spec.party_volume[p] for p in parties])
    start = datetime.combine(date.fromisoformat(spec.start_day), datetime.min.time(),
                             tzinfo=timezone.utc)
    tallies = {p: {"total": 0, "positive": 0, "negative": 0, "neutral": 0}
               for p in parties}
    # heavy-tailed author activity
    activity = rng.pareto(1.5, size=spec.n_users) + 1.0
    activity /= activity.sum()
    received: list[int] = []
    lines = []
    tid = 0
    for t in range(spec.n_days):
        k = spec.tweets_per_day
        authors = rng.choice(spec.n_users, size=k, p=activity) + 1
        party_idx = rng.choice(len(parties), size=k, p=volume)
        u_pol = rng.random(k)
        is_dm = rng.random(k) < spec.interaction_rate
        rts = _retweets(rng, k, spec.retweet_exponent, spec.retweet_cap)
        secs = np.sort(rng.integers(0, 86_400, size=k))
        kw_pick = rng.integers(0, 1 << 30, size=k)
        word_pick = rng.integers(0, 1 << 30, size=(k, 3))
        mixes = [spec.mix(p, t) for p in parties]
        for i in range(k):
            party = parties[party_idx[i]]
            pos, neg, _ = mixes[party_idx[i]]
            if u_pol[i] < pos:
                polarity = "positive"
                sent = POSITIVE_WORDS[word_pick[i, 0] % len(POSITIVE_WORDS)]
            elif u_pol[i] < pos + neg:
                polarity = "negative"
                sent = NEGATIVE_WORDS[word_pick[i, 0] % len(NEGATIVE_WORDS)]
            else:
                polarity = "neutral"
                sent = None
            author = int(authors[i])
            to = -1
            if is_dm[i] and spec.n_users > 1:
                to = _pick_target(rng, received, spec.n_users, author)
                received.append(to)
            kws = PARTY_KEYWORDS[party]
            words = [kws[kw_pick[i] % len(kws)],
                     FILLER_WORDS[word_pick[i, 1] % len(FILLER_WORDS)]]
            if sent:
                words.append(sent)
            words.append(FILLER_WORDS[word_pick[i, 2] % len(FILLER_WORDS)])
            if to > 0:
                words.insert(0, f"@user{to}")
            tid += 1
            ts = start + timedelta(days=t, seconds=int(secs[i]))
            rec = {
                "tweet_id": f"s{spec.seed}-{tid}",
                "from_user_id": author,
                "to_user_id": to,
                "text": " ".join(words),
                "retweet_count": 0 if to > 0 else int(rts[i]),
                "timestamp": ts.strftime("%Y-%m-%dT%H:%M:%SZ"),
            }
            lines.append(json.dumps(rec, ensure_ascii=False))
            tallies[party]["total"] += 1
            tallies[party][polarity] += 1
    return SyntheticCorpus(lines, tallies, spec)


def _pick_target(rng, received, n_users, author):
    """Preferential attachment: an earlier receiver with probability
    ``r / (r + n_users)``, else a uniform user; never the author."""
    for _ in range(32):
        r = len(received)
        if r and rng.random() < r / (r + n_users):
            v = received[int(rng.integers(r))]
        else:
            v = int(rng.integers(n_users)) + 1
        if v != author:
            return v
    return author % n_users + 1


def expected_ordering(spec: CorpusSpec, tol: float = 1e-12):
    """Parties ranked by planted popularity on the final day.

    Returns a list of party names, best first, or the string ``"tie"`` when
    the top two are within ``tol``.
    """
    last = spec.n_days - 1
    final = {p: float(spec.popularity(p, last)) for p in spec.parties}
    ranked = sorted(final, key=lambda p: (-final[p], p))
    if len(ranked) > 1 and abs(final[ranked[0]] - final[ranked[1]]) <= tol:
        return TIE
    return ranked
