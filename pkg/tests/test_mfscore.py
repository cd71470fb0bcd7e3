import math
from datetime import date

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import wasserstein_lp
from mfelect import ingest, mfscore
from mfelect.errors import DegenerateDataError
from mfelect.mfscore import (DailyDistribution, distance_matrix, fit_student_t, median,
                             mfs_user, wasserstein1)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_mfs_user_formula():
    assert mfs_user(0.01, [(0.5, 3), (-1.0, 0)]) == pytest.approx(1000 * 0.01 * (1.5 - 1.0))
    assert mfs_user(0.2, []) == 0.0
    assert mfs_user(0.5, [(1.0, 0)], coefficient=1.0) == 0.5


@given(st.floats(0, 1), st.floats(0, 1), st.lists(st.tuples(finite, st.integers(0, 50)),
                                                    max_size=8),
       st.lists(st.tuples(finite, st.integers(0, 50)), max_size=8))
def test_mfs_linear_and_additive(x1, x2, t1, t2):
    assert math.isclose(mfs_user(x1 + x2, t1), mfs_user(x1, t1) + mfs_user(x2, t1),
                        rel_tol=1e-9, abs_tol=1e-6)
    assert math.isclose(mfs_user(x1, t1 + t2), mfs_user(x1, t1) + mfs_user(x1, t2),
                        rel_tol=1e-9, abs_tol=1e-6)


def _rec(tid, user, day, party, score, rt=0):
    r = ingest.record_from_dict({"tweet_id": tid, "from_user_id": user, "to_user_id": -1,
                                 "text": "", "retweet_count": rt,
                                 "timestamp": f"{day}T10:00:00Z"})
    r.party_tags = frozenset({party})
    r.sentiment_score = score
    return r


def test_daily_distributions_absent_users_and_empty_days():
    window = ingest.AnalysisWindow(date(2020, 9, 1), date(2020, 9, 3))
    recs = [_rec("a", 1, "2020-09-01", "D", 1.0, 2), _rec("b", 1, "2020-09-01", "D", -0.5),
            _rec("c", 2, "2020-09-01", "D", 0.0), _rec("d", 3, "2020-09-03", "R", 1.0),
            _rec("e", 4, "2020-09-03", "D", 1.0)]
    buckets = ingest.bucket_by_day(recs, window)
    cent = {1: 0.1, 2: 0.2, 4: 0.3}
    dists = mfscore.daily_distributions(buckets, cent, "D", window.days())
    assert [len(d) for d in dists] == [2, 0, 1]
    assert dists[0].sample.tolist() == pytest.approx([1000 * 0.1 * 1.5, 0.0])
    assert dists[1].empty
    s = mfscore.median_series(dists)
    assert math.isnan(s.values[1]) and s.sample_sizes.tolist() == [2, 0, 1]
    filled, n = mfscore.interpolate_gaps(s.values)
    assert n == 1 and filled[1] == pytest.approx((75.0 + 300.0) / 2)
    mean = mfscore.median_series(dists, "mean")
    assert mean.values[0] == pytest.approx(75.0)


def test_unscored_record_rejected():
    window = ingest.AnalysisWindow(date(2020, 9, 1), date(2020, 9, 1))
    r = _rec("a", 1, "2020-09-01", "D", 1.0)
    r.sentiment_score = None
    with pytest.raises(ValueError):
        mfscore.user_day_scores(ingest.bucket_by_day([r], window), {}, "D")


def test_median_examples():
    assert median([3, 1, 2]) == 2
    assert median([4, 1, 3, 2]) == 2.5
    with pytest.raises(DegenerateDataError):
        median([])


@given(st.lists(finite, min_size=1, max_size=30), st.randoms())
def test_median_permutation_invariant(xs, rnd):
    ys = xs[:]
    rnd.shuffle(ys)
    assert median(xs) == median(ys)


@given(st.lists(finite, min_size=1, max_size=30), st.data())
def test_median_monotone(xs, data):
    i = data.draw(st.integers(0, len(xs) - 1))
    bump = data.draw(st.floats(0, 100))
    ys = xs[:]
    ys[i] += bump
    assert median(ys) >= median(xs)


@pytest.mark.parametrize("seed", range(50))
def test_wasserstein_matches_lp(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=rng.integers(1, 11))
    b = rng.normal(1, 2, size=rng.integers(1, 11))
    assert abs(wasserstein1(a, b) - wasserstein_lp(a, b)) <= 1e-10


@pytest.mark.parametrize("seed", range(50))
def test_wasserstein_metric_axioms(seed):
    rng = np.random.default_rng(500 + seed)
    a, b, c = (rng.standard_t(3, size=rng.integers(1, 30)) for _ in range(3))
    assert wasserstein1(a, b) == wasserstein1(b, a)
    assert wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c) + 1e-12
    assert wasserstein1(a, a) == 0.0


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=15),
       st.lists(st.floats(-100, 100), min_size=1, max_size=15), st.floats(-50, 50))
def test_wasserstein_translation(a, b, c):
    a, b = np.array(a), np.array(b)
    base = wasserstein1(a, b)
    assert math.isclose(wasserstein1(a + c, b + c), base, abs_tol=1e-9)
    assert wasserstein1(a + c, b) <= base + abs(c) + 1e-9
    assert math.isclose(wasserstein1(a + c, a), abs(c), abs_tol=1e-9)


def test_wasserstein_empty():
    with pytest.raises(DegenerateDataError):
        wasserstein1([], [1.0])


def test_distance_matrix():
    ds = [DailyDistribution(date(2020, 9, i + 1), "D", np.array(v))
          for i, v in enumerate([[0.0], [1.0, 2.0], [5.0]])]
    m = distance_matrix(ds)
    assert np.array_equal(m, m.T) and np.all(np.diag(m) == 0)
    assert m[0, 1] == 1.5 and m[0, 2] == 5.0
    with pytest.raises(DegenerateDataError):
        distance_matrix(ds + [DailyDistribution(date(2020, 9, 9), "D", np.array([]))])


def test_student_t_heavy_tails():
    rng = np.random.default_rng(3)
    fit = fit_student_t(rng.standard_t(3, size=5000))
    assert 2 <= fit.degrees_of_freedom <= 5
    assert abs(fit.location) <= fit.scale / math.sqrt(5000) * 5
    assert math.isfinite(fit.log_likelihood) and fit.n == 5000


def test_student_t_normal_sample():
    rng = np.random.default_rng(4)
    assert fit_student_t(rng.normal(size=5000)).degrees_of_freedom >= 20


def test_student_t_errors():
    with pytest.raises(DegenerateDataError):
        fit_student_t([1.0] * 20)
    with pytest.raises(DegenerateDataError):
        fit_student_t([1.0, 2.0, 3.0])


def test_series_csv_roundtrip(tmp_path):
    s = mfscore.MedianSeries("D", [date(2020, 9, 1), date(2020, 9, 2)],
                             np.array([0.1, math.nan]), np.array([3, 0]))
    p = tmp_path / "s.csv"
    mfscore.write_series_csv([s], p)
    assert p.read_text().splitlines() == ["date,party,median_mfs,sample_size",
                                          "2020-09-01,D,0.1,3", "2020-09-02,D,,0"]
    back = mfscore.read_series_csv(p)["D"]
    assert back.days == s.days and back.values[0] == 0.1 and math.isnan(back.values[1])
