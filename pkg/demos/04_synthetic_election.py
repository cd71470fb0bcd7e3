"""The whole pipeline on a synthetic election, stage by stage.

A corpus is generated in which the Democratic candidate grows more popular
over nine weeks and the Republican one less so. Each stage writes its
results to a working directory, exactly as the ``mfelect`` subcommands do,
and the final forecasts should rank the parties the way they were planted.
"""

import json
import sys
import tempfile
from pathlib import Path

from mfelect import pipeline, synthkit

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="mfelect-"))
cfg = pipeline.PipelineConfig(out=str(out), synth={"n_users": 3000, "tweets_per_day": 600},
                              topology=False, svg=True)

print("synth:", pipeline.run_synth(cfg)["tallies"])
summary = pipeline.run_ingest(cfg)
print(f"ingest: {summary['tagged']} tagged tweets, {summary['malformed']} malformed")
pipeline.run_sentiment_stats(cfg)
g = pipeline.run_graph_stats(cfg)
print(f"graph: {g['vertices']} users, {g['edges']} edges, rho {g['spectral_radius']:.3f}")
pipeline.run_score(cfg)
fc = pipeline.run_forecast(cfg)
print("forecast for", fc["target"], {p: round(v, 5) for p, v in fc["forecasts"].items()})
print("vote shares", {p: round(v, 2) for p, v in fc["vote_shares"].items()})

planted = synthkit.expected_ordering(synthkit.CorpusSpec(**cfg.synth))
got = sorted(fc["forecasts"], key=lambda p: -fc["forecasts"][p])
print("planted ordering", planted, "recovered" if got == planted else "NOT recovered")

pipeline.run_baselines(cfg)
report = pipeline.run_evaluate(cfg)
print("MAE against the 2020 result:",
      json.dumps({k: round(v["mean"], 2) for k, v in report["mae"].items()}))
print("outputs in", out)
