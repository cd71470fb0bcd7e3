import json
from datetime import date, datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from mfelect import ingest
from mfelect.errors import InputError, ParameterError
from mfelect.ingest import AnalysisWindow, KeywordTable, bucket_by_day, match_party


def line(**kw):
    base = {"tweet_id": "t1", "from_user_id": 5, "to_user_id": -1, "text": "hello",
            "retweet_count": 3, "timestamp": "2020-09-01T12:00:00Z"}
    base.update(kw)
    return json.dumps({k: v for k, v in base.items() if v is not None})


@pytest.fixture(scope="module")
def table():
    return KeywordTable.load()


def test_parse_passthrough():
    res = ingest.parse_tweet_stream([line()])
    assert res.malformed == 0
    (rec,) = res.records
    assert rec.to_user_id == -1 and rec.from_user_id == 5 and rec.retweet_count == 3
    assert rec.timestamp == datetime(2020, 9, 1, 12, tzinfo=timezone.utc)
    assert not rec.is_direct


def test_missing_timestamp_is_counted_and_skipped():
    res = ingest.parse_tweet_stream([line(timestamp=None), line(tweet_id="t2")])
    assert res.malformed == 1
    assert [r.tweet_id for r in res.records] == ["t2"]


def test_empty_input():
    res = ingest.parse_tweet_stream([])
    assert res.records == [] and res.malformed == 0


@pytest.mark.parametrize("bad", [
    "not json", "[1, 2]", line(from_user_id=0), line(to_user_id=-5),
    line(retweet_count=-1), line(timestamp="yesterday"), line(text=None),
])
def test_malformed_variants(bad):
    res = ingest.parse_tweet_stream([bad])
    assert res.records == [] and res.malformed == 1 and res.warnings


def test_blank_lines_ignored():
    res = ingest.parse_tweet_stream(["", line(), "   "])
    assert len(res.records) == 1 and res.malformed == 0


def test_duplicates_last_wins_keeps_first_position():
    lines = [line(tweet_id="a", text="one"), line(tweet_id="b"),
             line(tweet_id="a", text="two")]
    res = ingest.parse_tweet_stream(lines)
    assert res.duplicates == 1
    assert [r.tweet_id for r in res.records] == ["a", "b"]
    assert res.records[0].text == "two"


def test_self_message_keeps_tweet_without_edge():
    res = ingest.parse_tweet_stream([line(to_user_id=5)])
    assert res.self_messages == 1
    assert res.records[0].to_user_id == -1


def test_csv_format(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("tweet_id,from_user_id,to_user_id,text,retweet_count,timestamp\n"
                 "x,1,2,\"Biden, today\",0,2020-09-02T00:00:00+00:00\n", encoding="utf-8")
    res = ingest.read_records(p)
    assert res.records[0].to_user_id == 2 and res.records[0].text == "Biden, today"


def test_unreadable_source_is_fatal(tmp_path):
    with pytest.raises(InputError):
        ingest.read_records(tmp_path / "missing.jsonl")


def test_roundtrip_fields(tmp_path):
    res = ingest.parse_tweet_stream([line(to_user_id=9, text="Ünïcode @x #y")])
    rec = res.records[0]
    rec.party_tags = frozenset({"Democratic"})
    rec.sentiment_score = -0.25
    p = tmp_path / "r.jsonl"
    ingest.write_records([rec], p)
    back = ingest.read_records(p).records[0]
    assert back == rec


@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=40),
       st.integers(1, 10**9), st.integers(0, 10**6))
def test_roundtrip_property(text, uid, rt):
    rec = ingest.record_from_dict({"tweet_id": "z", "from_user_id": uid, "to_user_id": -1,
                                   "text": text, "retweet_count": rt,
                                   "timestamp": "2020-10-01T01:02:03Z"})
    assert ingest.parse_tweet_stream([rec.to_json()]).records[0] == rec


# --- keyword matching ----------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    ("Trump rally tonight", {"Republican"}),
    ("thanks @POTUS", {"Republican"}),
    ("go @realDonaldTrump", {"Republican"}),
    ("#MAGA2020 all day", {"Republican"}),
    ("vote Biden", {"Democratic"}),
    ("No Malarkey! from joe", {"Democratic"}),
    ("our best days still lie ahead", {"Democratic"}),
    ("Howie Hawkins speaks", {"Green"}),
    ("jo jorgensen 2020", {"Libertarian"}),
    ("Biden vs Trump", {"Democratic", "Republican"}),
    ("nothing here", set()),
])
def test_match_party(table, text, expected):
    assert match_party(text, table) == expected


def test_word_boundaries(table):
    assert match_party("Spence went home", table) == set()
    assert match_party("Pence went home", table) == {"Republican"}
    assert match_party("Trumpet player", table) == set()


def test_token_patterns_are_whole_tokens(table):
    assert match_party("@POTUSfan", table) == set()
    assert match_party("@VPs", table) == set()
    assert match_party("#MAGA2020s", table) == set()
    assert match_party("email@GOP", table) == set()
    assert match_party("(@GOP)", table) == {"Republican"}


def test_mention_is_not_a_bare_word(table):
    # "Pence" the word must not fire inside the @Mike_Pence handle's suffix
    assert match_party("@Mike_Pence", table) == {"Republican"}
    assert match_party("Mike_Pence", table) == set()


@given(st.sampled_from(["Biden and Trump", "@GOP rally", "Howie Hawkins", "keep america great",
                        "no malarkey!", "random words"]),
       st.lists(st.booleans(), min_size=30, max_size=30))
def test_match_case_invariant(text, flips):
    table = KeywordTable.load()
    flipped = "".join(c.upper() if f else c.lower() for c, f in zip(text, flips + [False] * 40))
    assert match_party(text, table) == match_party(flipped, table)


def test_collection_hashtags_loaded(table):
    assert {p.value for p in table.collection} == {"#USAelection", "#NovemberElection"}
    assert set(table.parties) == {"Democratic", "Republican", "Green", "Libertarian"}


def test_keyword_table_validation():
    with pytest.raises(ParameterError):
        KeywordTable.from_mapping({"A": []})
    with pytest.raises(ParameterError):
        KeywordTable.from_mapping({"A": [{"kind": "word", "value": "  "}]})
    with pytest.raises(ParameterError):
        KeywordTable.from_mapping({"A": [{"kind": "regex", "value": "x"}]})


def test_custom_table_file(tmp_path):
    p = tmp_path / "k.json"
    p.write_text(json.dumps({"X": [{"kind": "phrase", "value": "a b"}]}))
    t = KeywordTable.load(p)
    assert match_party("xa bx", t) == {"X"}


def test_tag_records_multiparty(table):
    recs = ingest.parse_tweet_stream([line(tweet_id="1", text="Biden Trump"),
                                      line(tweet_id="2", text="Biden"),
                                      line(tweet_id="3", text="weather")]).records
    kept = ingest.tag_records(recs, table)
    assert [r.tweet_id for r in kept] == ["1", "2"]
    assert kept[0].party_tags == {"Democratic", "Republican"}
    assert [r.tweet_id for r in ingest.tag_records(recs, table, drop_multiparty=True)] == ["2"]


# --- windowing -------------------------------------------------------------

WINDOW = AnalysisWindow(date(2020, 9, 1), date(2020, 11, 2))


def _rec(ts, tid="t"):
    return ingest.parse_tweet_stream([line(tweet_id=tid, timestamp=ts)]).records[0]


def test_bucket_boundaries():
    b = bucket_by_day([_rec("2020-09-01T23:59:00Z")], WINDOW)
    assert list(b) == [date(2020, 9, 1)]
    assert bucket_by_day([_rec("2020-08-31T12:00:00Z")], WINDOW) == {}
    assert list(bucket_by_day([_rec("2020-11-02T23:59:59Z")], WINDOW)) == [date(2020, 11, 2)]


def test_bucket_same_day():
    b = bucket_by_day([_rec("2020-09-03T01:00:00Z", "a"), _rec("2020-09-03T22:00:00Z", "b")],
                      WINDOW)
    assert len(b[date(2020, 9, 3)]) == 2


def test_bucket_uses_utc_date():
    b = bucket_by_day([_rec("2020-09-02T01:00:00+05:00")], WINDOW)
    assert list(b) == [date(2020, 9, 1)]


@given(st.lists(st.integers(0, 80 * 24), max_size=50))
def test_bucket_partition(hours):
    recs = []
    for i, h in enumerate(hours):
        r = _rec("2020-08-20T00:00:00Z", str(i))
        r.timestamp += timedelta(hours=h)
        recs.append(r)
    b = bucket_by_day(recs, WINDOW)
    assert sum(map(len, b.values())) == sum(1 for r in recs if r.day in WINDOW)
    assert all(r.day == d for d, rs in b.items() for r in rs)


def test_window_parse_and_validation():
    w = AnalysisWindow.parse("2020-09-01:2020-11-02")
    assert w == WINDOW and len(w) == 63 and str(w) == "2020-09-01:2020-11-02"
    with pytest.raises(ParameterError):
        AnalysisWindow.parse("2020-11-02:2020-09-01")
    with pytest.raises(ParameterError):
        AnalysisWindow.parse("garbage")
