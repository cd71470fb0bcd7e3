"""Pipeline stages over persisted intermediate files.

Every stage reads its inputs from the output directory (or the paths in the
config) and writes plain CSV/JSON back into it, so each can be rerun on its
own. Outputs carry no timestamps and are byte-identical across reruns.

Layout of the output directory::

    corpus.jsonl, synth_tallies.json        synth
    records/<party>/<date>.jsonl            ingest
    ingest_summary.json
    party_counts.csv, daily_counts.csv      sentiment-stats
    top_users_sentiment.csv
    edges.tsv, centrality.csv               graph-stats
    graph_summary.json, graph_topology.csv
    mfs_scores.csv, series_<stat>.csv       score
    w1_<party>.csv, student_t_<party>.csv
    model_<stat>_<party>.json               forecast
    forecast_<stat>_<party>.csv, forecasts_<stat>.json
    track_<stat>.csv, vote_shares_<stat>.json
    baselines.csv, baselines.json           baselines
    evaluation_shares.csv, evaluation_mae.csv, evaluation.json
"""

from __future__ import annotations

import csv
import json
import logging
import shutil
import warnings
from dataclasses import asdict, dataclass, field, fields
from datetime import date, timedelta
from pathlib import Path

from . import election, farima, ingest, mfscore, netgraph, sentiment, svg, synthkit
from .errors import DegenerateDataError, InputError, ParameterError, SeriesTooShortError

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    corpus: str | None = None
    corpus_format: str | None = None
    lexicon: str | None = None          # None -> bundled test lexicon
    keywords: str | None = None         # None -> bundled US 2020 keyword table
    out: str = "out"
    window: str = "2020-09-01:2020-11-02"
    parties: list = field(default_factory=lambda: ["Democratic", "Republican"])
    drop_multiparty: bool = False
    pagerank: dict = field(default_factory=dict)
    farima: dict = field(default_factory=dict)
    statistic: str = "median"
    mfs_coefficient: float = mfscore.MFS_COEFFICIENT
    baselines: list = field(default_factory=lambda: list(election.BASELINES))
    reference: str | None = None        # None -> bundled US 2020 results
    counts: str | None = None           # None -> <out>/party_counts.csv
    forecasts: dict | None = None       # explicit forecast values for evaluate
    graph_slicing: str = "window"       # window | daily | cumulative
    topology: bool = True
    top_k: int = 100
    fit_student_t: bool = True
    distances: bool = True
    svg: bool = False
    synth: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        self.analysis_window = ingest.AnalysisWindow.parse(self.window)
        if self.statistic not in mfscore.STATISTICS:
            raise ParameterError(f"statistic must be one of {mfscore.STATISTICS}")
        if self.graph_slicing not in ("window", "daily", "cumulative"):
            raise ParameterError("graph_slicing must be window, daily or cumulative")
        if len(self.parties) != 2:
            raise ParameterError("exactly two parties are compared")
        unknown = set(self.farima) - {"p", "q", "K", "orders", "horizon", "track", "track_start"}
        if unknown:
            raise ParameterError(f"unknown farima option(s): {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config key(s): {sorted(unknown)}")
        data = dict(data)
        if base_dir is not None:
            for key in ("corpus", "lexicon", "keywords", "reference", "counts", "out"):
                if data.get(key) and not Path(data[key]).is_absolute():
                    data[key] = str(Path(base_dir) / data[key])
        return cls(**data)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def pagerank_params(self) -> netgraph.PageRankParams:
        return netgraph.PageRankParams(**self.pagerank)

    def farima_option(self, key, default=None):
        return self.farima.get(key, default)


# --------------------------------------------------------------------------
# io helpers

def _dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise InputError(f"{path} not found; run `{stage}` first")
    return path


def load_store(out: Path, parties=None) -> list:
    """All records of the tagged store, deduplicated by tweet ID, in a
    deterministic order."""
    root = _require(out / "records", "ingest")
    seen = {}
    dirs = sorted(p for p in root.iterdir() if p.is_dir())
    for d in dirs:
        if parties is not None and d.name not in parties:
            continue
        for f in sorted(d.glob("*.jsonl")):
            for rec in ingest.read_records(f).records:
                seen.setdefault(rec.tweet_id, rec)
    return sorted(seen.values(), key=lambda r: (r.timestamp, r.tweet_id))


# --------------------------------------------------------------------------
# stages

def run_synth(cfg: PipelineConfig) -> dict:
    spec_data = dict(cfg.synth)
    if cfg.seed is not None:
        spec_data["seed"] = cfg.seed
    spec = synthkit.CorpusSpec.from_dict(spec_data)
    corpus = synthkit.generate_corpus(spec)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    corpus.write(out / "corpus.jsonl")
    summary = {"spec": spec.to_dict(), "tallies": corpus.tallies,
               "expected_ordering": synthkit.expected_ordering(spec),
               "n_records": len(corpus.lines)}
    _dump_json(summary, out / "synth_tallies.json")
    return summary


def tag_and_score(records, table, lexicon, drop_multiparty=False):
    """Tag records in place, keep the tagged ones and score them.

    Returns ``(tagged, n_untagged, n_multiparty)``.
    """
    n_multi = n_untagged = 0
    tagged = []
    for rec in records:
        tags = table.match(rec.text)
        n_untagged += not tags
        if len(tags) > 1:
            n_multi += 1
        if not tags or (drop_multiparty and len(tags) > 1):
            continue
        rec.party_tags = tags
        tagged.append(rec)
    sentiment.score_records(tagged, lexicon)
    return tagged, n_untagged, n_multi


def run_ingest(cfg: PipelineConfig) -> dict:
    """Parse, tag, score and bucket the corpus into the per-party, per-day store."""
    out = cfg.out_dir
    corpus = cfg.corpus or str(out / "corpus.jsonl")
    parsed = ingest.read_records(corpus, cfg.corpus_format)
    table = ingest.KeywordTable.load(cfg.keywords)
    lexicon = sentiment.load_lexicon(cfg.lexicon)
    window = cfg.analysis_window

    in_window = [r for r in parsed.records if r.day in window]
    tagged, n_untagged, n_multi = tag_and_score(in_window, table, lexicon,
                                                cfg.drop_multiparty)

    store = out / "records"
    if store.exists():
        shutil.rmtree(store)
    files: dict = {}
    for rec in tagged:
        for party in sorted(rec.party_tags):
            files.setdefault((party, rec.day), []).append(rec)
    for (party, day), recs in sorted(files.items()):
        d = store / party
        d.mkdir(parents=True, exist_ok=True)
        ingest.write_records(recs, d / f"{day.isoformat()}.jsonl")
    store.mkdir(parents=True, exist_ok=True)

    counts = sentiment.counts_by_party(tagged, sorted(table.parties))
    summary = {
        "window": str(window),
        "parsed": len(parsed.records),
        "malformed": parsed.malformed,
        "duplicates": parsed.duplicates,
        "self_messages": parsed.self_messages,
        "out_of_window": len(parsed.records) - len(in_window),
        "untagged": n_untagged,
        "multiparty": n_multi,
        "multiparty_dropped": cfg.drop_multiparty,
        "tagged": len(tagged),
        "counts": {p: asdict(c) for p, c in counts.items()},
    }
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(summary, out / "ingest_summary.json")
    return summary


def run_sentiment_stats(cfg: PipelineConfig) -> dict:
    out = cfg.out_dir
    records = load_store(out)
    parties = list(cfg.parties)
    counts = sentiment.counts_by_party(records, parties)
    sentiment.write_counts_csv(counts.values(), out / "party_counts.csv")

    buckets = ingest.bucket_by_day(records, cfg.analysis_window)
    with open(out / "daily_counts.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(sentiment.COUNT_FIELDS[:1] + ("date",) + sentiment.COUNT_FIELDS[1:])
        for day, recs in buckets.items():
            for p, c in sentiment.counts_by_party(recs, parties).items():
                w.writerow([p, day.isoformat(), c.total, c.positive, c.negative, c.neutral])

    result = {"counts": {p: asdict(c) for p, c in counts.items()}}
    # top users by centrality; computed here when graph-stats has not run
    cent_path = out / "centrality.csv"
    if cent_path.exists():
        cent = netgraph.read_centrality_csv(cent_path)
    elif records:
        params = cfg.pagerank_params()
        cent = netgraph.pagerank(netgraph.build_graph(records, params.weighted), params).values
    else:
        cent = {}
    top = set(netgraph.top_k_by_centrality(cent, cfg.top_k))
    top_counts = sentiment.counts_by_party(
        [r for r in records if r.from_user_id in top], parties)
    sentiment.write_counts_csv(top_counts.values(), out / "top_users_sentiment.csv")
    result["top_users"] = {p: asdict(c) for p, c in top_counts.items()}
    return result


def _topology_row(label, g):
    apl, bc = netgraph.path_statistics(g)
    return {"slice": label, "vertices": g.n, "edges": len(g.weights),
            "average_path_length": apl.mean, "reachable_pairs": apl.pairs,
            "global_clustering": netgraph.global_clustering(g),
            "mean_betweenness": sum(bc.values()) / g.n if g.n else 0.0}


def run_graph_stats(cfg: PipelineConfig) -> dict:
    out = cfg.out_dir
    records = load_store(out)
    params = cfg.pagerank_params()
    g = netgraph.build_graph(records, weighted=params.weighted)
    if g.n == 0:
        raise InputError("no records in the store; nothing to build a graph from")
    netgraph.write_edge_list(g, out / "edges.tsv")
    rho = netgraph.spectral_radius(g, weighted=params.weighted)
    scores = netgraph.pagerank(g, params, rho=rho)
    netgraph.write_centrality_csv(scores, out / "centrality.csv")
    summary = {"vertices": g.n, "edges": len(g.weights), "spectral_radius": rho,
               "alpha": params.alpha, "iterations": scores.iterations_used,
               "residual": scores.residual, "weighted": params.weighted,
               "slicing": cfg.graph_slicing}

    if cfg.topology:
        rows = []
        if cfg.graph_slicing == "window":
            rows.append(_topology_row(str(cfg.analysis_window), g))
        else:
            buckets = ingest.bucket_by_day(records, cfg.analysis_window)
            acc = []
            for day, recs in buckets.items():
                acc = acc + recs if cfg.graph_slicing == "cumulative" else recs
                rows.append(_topology_row(day.isoformat(),
                                          netgraph.build_graph(acc, params.weighted)))
        with open(out / "graph_topology.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: ("" if v is None else v) for k, v in r.items()})
        summary["topology"] = rows
    _dump_json(summary, out / "graph_summary.json")
    return summary


def run_score(cfg: PipelineConfig) -> dict:
    out = cfg.out_dir
    records = load_store(out)
    cent = netgraph.read_centrality_csv(_require(out / "centrality.csv", "graph-stats"))
    window = cfg.analysis_window
    buckets = ingest.bucket_by_day(records, window)
    days = window.days()
    series = []
    with open(out / "mfs_scores.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "party", "user_id", "mfs"])
        for party in cfg.parties:
            for s in mfscore.user_day_scores(buckets, cent, party, cfg.mfs_coefficient):
                w.writerow([s.day.isoformat(), party, s.user_id, repr(s.mfs)])
    result = {"statistic": cfg.statistic, "parties": {}}
    for party in cfg.parties:
        dists = mfscore.daily_distributions(buckets, cent, party, days,
                                            cfg.mfs_coefficient)
        s = mfscore.median_series(dists, cfg.statistic)
        series.append(s)
        nonempty = [d for d in dists if not d.empty]
        if cfg.distances and nonempty:
            mfscore.write_matrix_csv(mfscore.distance_matrix(nonempty),
                                     [d.day for d in nonempty], out / f"w1_{party}.csv")
        if cfg.fit_student_t:
            _write_tfits(nonempty, out / f"student_t_{party}.csv")
        result["parties"][party] = {"empty_days": int(sum(d.empty for d in dists)),
                                    "scored_user_days": int(sum(len(d) for d in dists))}
    mfscore.write_series_csv(series, out / f"series_{cfg.statistic}.csv")
    return result


def _write_tfits(dists, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "n", "df", "loc", "scale", "log_likelihood"])
        for d in dists:
            try:
                fit = mfscore.fit_student_t(d.sample)
            except DegenerateDataError:
                continue
            w.writerow([d.day.isoformat(), fit.n, repr(fit.degrees_of_freedom),
                        repr(fit.location), repr(fit.scale), repr(fit.log_likelihood)])


def _fit(values, cfg):
    return farima.fit_farima(values, cfg.farima_option("p"), cfg.farima_option("q"),
                             cfg.farima_option("K", farima.DEFAULT_TRUNCATION),
                             tuple(cfg.farima_option("orders", (0, 1, 2))))


def fit_and_forecast(s: mfscore.MedianSeries, cfg: PipelineConfig, h: int):
    """Fit one party's daily series and forecast ``h`` steps past its end.

    Returns ``(model, forecasts, n_interpolated)``.
    """
    if len(s) < farima.MIN_GPH_LENGTH:
        raise SeriesTooShortError(
            f"series too short: {len(s)} day(s) for {s.party}, need "
            f"{farima.MIN_GPH_LENGTH}")
    values, n_gaps = mfscore.interpolate_gaps(s.values)
    if n_gaps:
        log.info("%s: interpolated %d missing day(s)", s.party, n_gaps)
    model = _fit(values, cfg)
    return model, farima.forecast(model, values, h), n_gaps


def run_forecast(cfg: PipelineConfig) -> dict:
    """Fit each party's series, forecast ``horizon`` days past the window,
    convert to vote shares, and build the expanding-window track."""
    out = cfg.out_dir
    stat = cfg.statistic
    series = mfscore.read_series_csv(_require(out / f"series_{stat}.csv", "score"), stat)
    h = int(cfg.farima_option("horizon", 1))
    window = cfg.analysis_window
    forecasts, gaps, models = {}, {}, {}
    for party in cfg.parties:
        if party not in series:
            raise InputError(f"no {stat} series for {party}")
        model, fc, gaps[party] = fit_and_forecast(series[party], cfg, h)
        models[party] = model
        forecasts[party] = fc
        _dump_json(farima.model_summary(model), out / f"model_{stat}_{party}.json")
        with open(out / f"forecast_{stat}_{party}.csv", "w", encoding="utf-8",
                  newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["horizon", "value"])
            for k, v in enumerate(fc, 1):
                w.writerow([k, repr(float(v))])

    pa, pb = cfg.parties
    target = window.end_day + timedelta(days=h)
    shares = election.vote_share_from_forecasts(float(forecasts[pa][-1]),
                                                float(forecasts[pb][-1]), pa, pb)
    next_day = {p: float(forecasts[p][0]) for p in cfg.parties}
    _dump_json({"statistic": stat, "target": target.isoformat(),
                "forecasts": {p: float(forecasts[p][-1]) for p in cfg.parties},
                "next_day": next_day, "interpolated_days": gaps},
               out / f"forecasts_{stat}.json")
    _dump_json(shares.to_dict(), out / f"vote_shares_{stat}.json")

    track = _track(series, cfg, target) if cfg.farima_option("track", True) else []
    if cfg.svg:
        svg.write_series_chart(
            {p: (series[p].days, series[p].values) for p in cfg.parties},
            {p: (target, float(forecasts[p][-1])) for p in cfg.parties},
            out / f"series_{stat}.svg", title=f"daily {stat} MFS")
    return {"forecasts": {p: float(forecasts[p][-1]) for p in cfg.parties},
            "target": target.isoformat(), "vote_shares": shares.shares,
            "track_points": len(track)}


def _track(series, cfg, target):
    """Refit on expanding windows ending at each cutoff from ``track_start``
    and forecast ``target`` from each."""
    stat = cfg.statistic
    start = cfg.farima_option("track_start")
    window = cfg.analysis_window
    start_day = (date.fromisoformat(start) if start
                 else window.end_day - timedelta(days=28))
    rows = []
    for party in cfg.parties:
        s = series[party]
        values, _ = mfscore.interpolate_gaps(s.values)
        for i, day in enumerate(s.days):
            if day < start_day or i + 1 < farima.MIN_GPH_LENGTH:
                continue
            h = (target - day).days
            try:
                model = _fit(values[:i + 1], cfg)
            except DegenerateDataError as exc:
                log.info("track %s %s skipped: %s", party, day, exc)
                continue
            v = float(farima.forecast(model, values[:i + 1], h)[-1])
            rows.append([day.isoformat(), party, target.isoformat(), h, repr(v)])
    with open(cfg.out_dir / f"track_{stat}.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cutoff", "party", "target", "horizon", "value"])
        w.writerows(rows)
    return rows


def _load_counts(cfg):
    path = Path(cfg.counts) if cfg.counts else cfg.out_dir / "party_counts.csv"
    if not path.exists():
        raise InputError(f"counts table {path} not found; run `sentiment-stats` "
                         "or set `counts`")
    return sentiment.read_counts_csv(path)


def run_baselines(cfg: PipelineConfig) -> dict:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    counts = _load_counts(cfg)
    pa, pb = cfg.parties
    results = {}
    for name in cfg.baselines:
        if name not in election.BASELINES:
            raise ParameterError(f"unknown baseline {name!r}")
        results[name] = election.BASELINES[name](counts[pa], counts[pb])
    with open(out / "baselines.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", pa, pb, "total"])
        for name, s in results.items():
            w.writerow([name, repr(s[pa]), repr(s[pb]), repr(s.total)])
    _dump_json({k: v.to_dict() for k, v in results.items()}, out / "baselines.json")
    return {k: v.shares for k, v in results.items()}


def run_evaluate(cfg: PipelineConfig) -> dict:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    counts = _load_counts(cfg)
    reference = election.ReferenceResults.load(cfg.reference)
    forecasts = cfg.forecasts
    if forecasts is None:
        path = out / f"forecasts_{cfg.statistic}.json"
        if path.exists():
            forecasts = json.loads(path.read_text(encoding="utf-8"))["forecasts"]
    report = election.evaluate(counts, forecasts, reference, tuple(cfg.parties),
                               tuple(cfg.baselines))
    report.write_csv(out / "evaluation_shares.csv", out / "evaluation_mae.csv")
    _dump_json(report.to_dict(), out / "evaluation.json")
    return report.to_dict()


def forecast_corpus(lines, cfg: PipelineConfig) -> dict:
    """Whole pipeline in memory: corpus lines -> final forecast per party.

    Runs the same steps as ingest, graph-stats, score and forecast without
    the intermediate files; the results agree with the staged run.
    """
    parsed = ingest.parse_tweet_stream(lines, cfg.corpus_format or "jsonl")
    table = ingest.KeywordTable.load(cfg.keywords)
    lexicon = sentiment.load_lexicon(cfg.lexicon)
    window = cfg.analysis_window
    in_window = [r for r in parsed.records if r.day in window]
    tagged, _, _ = tag_and_score(in_window, table, lexicon, cfg.drop_multiparty)
    params = cfg.pagerank_params()
    g = netgraph.build_graph(tagged, weighted=params.weighted)
    if g.n == 0:
        raise InputError("no tagged records in the window")
    cent = netgraph.pagerank(g, params).values
    buckets = ingest.bucket_by_day(tagged, window)
    h = int(cfg.farima_option("horizon", 1))
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", farima.TruncationWarning)
        for party in cfg.parties:
            dists = mfscore.daily_distributions(buckets, cent, party, window.days(),
                                                cfg.mfs_coefficient)
            s = mfscore.median_series(dists, cfg.statistic)
            out[party] = float(fit_and_forecast(s, cfg, h)[1][-1])
    return out


STAGES = {
    "synth": run_synth,
    "ingest": run_ingest,
    "sentiment-stats": run_sentiment_stats,
    "graph-stats": run_graph_stats,
    "score": run_score,
    "forecast": run_forecast,
    "baselines": run_baselines,
    "evaluate": run_evaluate,
}


def run_all(cfg: PipelineConfig, stages=("ingest", "sentiment-stats", "graph-stats",
                                         "score", "forecast")) -> dict:
    results = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", farima.TruncationWarning)
        for name in stages:
            results[name] = STAGES[name](cfg)
    return results


__all__ = ["PipelineConfig", "STAGES", "run_all", "load_store"]
