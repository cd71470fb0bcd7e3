"""Multifactor election forecasting from tweet corpora.

Stages: keyword tagging and day bucketing (:mod:`ingest`), lexicon
sentiment (:mod:`sentiment`), interaction-graph centrality
(:mod:`netgraph`), per-user multifactor scores (:mod:`mfscore`), FARIMA
forecasting (:mod:`farima`) and vote-share conversion with baselines
(:mod:`election`). :mod:`synthkit` builds synthetic corpora and
:mod:`pipeline` / :mod:`cli` run the stages over files.
"""

from . import election, farima, ingest, mfscore, netgraph, sentiment, synthkit
from .election import (ReferenceResults, VoteShares, baseline_actual_sentiment,
                       baseline_cross_negative, baseline_popularity, mae,
                       vote_share_from_forecasts)
from .errors import (ConvergenceError, DegenerateDataError, InputError, MFElectError,
                     ParameterError, SeriesTooShortError)
from .farima import FarimaModel, estimate_d, fit_farima, forecast, simulate_farima
from .ingest import AnalysisWindow, KeywordTable, TweetRecord, match_party, parse_tweet_stream
from .mfscore import distance_matrix, fit_student_t, mfs_user, wasserstein1
from .netgraph import InteractionGraph, PageRankParams, build_graph, pagerank
from .sentiment import PartyCounts, load_lexicon, score_tweet
from .synthkit import CorpusSpec, expected_ordering, generate_corpus

__version__ = "0.1.0"
