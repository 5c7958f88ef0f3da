import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dancehit.datamodel import (
    SCHEMES, ChartListing, Dataset, Label, PeakRecord, SongAnalysis, assemble_dataset,
    compute_peaks, get_scheme, label_with_gap, load_analyses, out_of_time_split, parse_chart_csv,
    parse_date, song_key, stratified_folds, write_chart_csv,
)

from fixtures import analysis_dict, chart_date, layout_dataset


def write(tmp_path, text, name="charts.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# ---------------------------------------------------------------- parsing

def test_parse_chart_row(tmp_path):
    p = write(tmp_path, "title,artist,position,date\nHarlem Shake,Bauer,2,2013-03-09\n")
    parsed = parse_chart_csv(p)
    assert parsed.skipped == 0
    assert parsed.listings == [ChartListing("Harlem Shake", "Bauer", 2, dt.date(2013, 3, 9))]


def test_parse_header_only_gives_empty_list(tmp_path):
    assert parse_chart_csv(write(tmp_path, "title,artist,position,date\n")).listings == []


def test_parse_bad_position_is_skipped(tmp_path):
    p = write(tmp_path, "title,artist,position,date\nA,B,abc,2013-03-09\nC,D,3,2013-03-09\n")
    parsed = parse_chart_csv(p)
    assert parsed.skipped == 1
    assert len(parsed.listings) == 1


def test_parse_rejects_bad_header_and_missing_file(tmp_path):
    with pytest.raises(ValueError, match="header"):
        parse_chart_csv(write(tmp_path, "song,who,pos,when\n"))
    with pytest.raises(FileNotFoundError):
        parse_chart_csv(tmp_path / "absent.csv")


def test_quoted_fields_round_trip(tmp_path):
    rows = [ChartListing('Hello, "World"', "A feat. B", 7, dt.date(2011, 5, 1))]
    write_chart_csv(tmp_path / "c.csv", rows)
    assert parse_chart_csv(tmp_path / "c.csv").listings == rows


def test_parse_date_formats():
    assert parse_date("2013-03-09") == dt.date(2013, 3, 9)
    assert parse_date("09/03/13") == dt.date(2013, 3, 9)
    assert parse_date("09/03/85") == dt.date(1985, 3, 9)
    with pytest.raises(ValueError):
        parse_date("March 9")


def test_position_must_be_positive():
    with pytest.raises(ValueError):
        ChartListing("a", "b", 0, dt.date(2012, 1, 1))


# ---------------------------------------------------------------- peaks

def test_peak_is_minimum_position():
    rows = [ChartListing("Harlem Shake", "Bauer", p, chart_date(i)) for i, p in enumerate([2, 1, 5])]
    (peak,) = compute_peaks(rows)
    assert peak.peak_position == 1
    assert peak.first_date == chart_date(0) and peak.last_date == chart_date(2)


def test_single_listing_peak():
    (peak,) = compute_peaks([ChartListing("Are You Ready For Love", "Elton John", 34, chart_date(0))])
    assert peak.peak_position == 34


def test_featuring_variants_share_a_key():
    forms = ["X Feat Y", "X Featuring Y", "x  ft. y", "X FEAT. Y"]
    assert len({song_key("Song", f) for f in forms}) == 1
    assert song_key("Feathers", "A") != song_key("feat hers", "A")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(1, 40), st.integers(0, 30)), min_size=1, max_size=30),
       st.randoms(use_true_random=False))
def test_compute_peaks_permutation_invariant(rows, rnd):
    listings = [ChartListing(f"S{s}", "A", p, chart_date(w)) for s, p, w in rows]
    shuffled = listings[:]
    rnd.shuffle(shuffled)
    peaks = compute_peaks(listings)
    assert peaks == compute_peaks(shuffled)
    for rec in peaks:
        mine = [li for li in listings if li.song_key == rec.song_key]
        assert rec.peak_position == min(li.position for li in mine)
        assert rec.first_date <= rec.last_date


# ---------------------------------------------------------------- gap labels

@pytest.mark.parametrize("peak,scheme,expected", [
    (1, "D1", Label.HIT), (15, "D1", Label.EXCLUDED), (15, "D3", Label.HIT), (34, "D1", Label.NONHIT),
    (10, "D1", Label.HIT), (11, "D1", Label.EXCLUDED), (30, "D1", Label.NONHIT),
    (19, "D2", Label.EXCLUDED), (20, "D2", Label.NONHIT), (21, "D3", Label.NONHIT),
])
def test_label_examples(peak, scheme, expected):
    assert label_with_gap(peak, get_scheme(scheme)) is expected


def test_label_accepts_peak_records():
    rec = PeakRecord(("a", "b"), 3, dt.date(2012, 1, 1), dt.date(2012, 1, 1))
    assert label_with_gap(rec, SCHEMES["D1"]) is Label.HIT


@pytest.mark.parametrize("name,counts", [("D1", (10, 11, 19)), ("D2", (10, 21, 9)), ("D3", (20, 20, 0))])
def test_label_counts_on_positions_1_to_40(name, counts):
    labels = [label_with_gap(p, get_scheme(name)) for p in range(1, 41)]
    assert (labels.count(Label.HIT), labels.count(Label.NONHIT), labels.count(Label.EXCLUDED)) == counts


@given(st.integers(1, 10_000), st.sampled_from(sorted(SCHEMES)))
def test_labels_exhaustive_and_exclusive(peak, name):
    s = get_scheme(name)
    hits, nons = peak <= s.hit_max, peak >= s.nonhit_min
    assert not (hits and nons)
    assert s.label(peak) is (Label.HIT if hits else Label.NONHIT if nons else Label.EXCLUDED)


def test_d3_has_no_gap():
    s = get_scheme("D3")
    assert s.hit_max + 1 == s.nonhit_min
    with pytest.raises(ValueError):
        get_scheme("D4")


# ---------------------------------------------------------------- analyses

def test_analysis_validation():
    good = analysis_dict()
    SongAnalysis.from_dict(good)
    for bad in ({"segments": [[0.0] * 11]}, {"duration": 0}, {"tempo": -1}, {"mode": 2}, {"key": 12}):
        with pytest.raises(ValueError):
            SongAnalysis.from_dict({**good, **bad})


def test_load_analyses(tmp_path):
    import json

    (tmp_path / "a.json").write_text(json.dumps(analysis_dict(title="One")))
    (tmp_path / "b.json").write_text(json.dumps(analysis_dict(title="Two", tempo=-3)))
    loaded = load_analyses(tmp_path)
    assert list(loaded) == [song_key("One", "Artist")]
    with pytest.raises(FileNotFoundError):
        load_analyses(tmp_path / "missing")


# ---------------------------------------------------------------- assembly

def _peaks(*positions):
    return [PeakRecord(song_key(f"S{p}", "A"), p, chart_date(i), chart_date(i)) for i, p in enumerate(positions)]


def _analyses(*positions, **overrides):
    rng = np.random.default_rng(1)
    return {song_key(f"S{p}", "A"): SongAnalysis.from_dict(analysis_dict(rng, title=f"S{p}", **overrides))
            for p in positions}


def test_assemble_three_peaks():
    ds, rep = assemble_dataset(_peaks(1, 15, 34), _analyses(1, 15, 34), SCHEMES["D1"])
    assert len(ds) == 2 and ds.X.shape == (2, 138)
    assert ds.y.tolist() == [1, 0]
    assert rep.excluded == 1 and rep.kept == 2


def test_assemble_drops_missing_and_unusable():
    analyses = _analyses(1, 34)
    analyses.update(_analyses(2, beats=[0.5]))
    ds, rep = assemble_dataset(_peaks(1, 2, 3, 34), analyses, SCHEMES["D1"])
    assert rep.missing_analysis == 1 and rep.unusable_analysis == 1 and len(ds) == 2


def test_assemble_empty_is_an_error():
    with pytest.raises(ValueError):
        assemble_dataset(_peaks(15), _analyses(15), SCHEMES["D1"])


def test_dataset_validation_and_csv(tmp_path):
    ds = layout_dataset(5, 5, 2, 2)
    ds.to_csv(tmp_path / "d.csv")
    back = Dataset.from_csv(tmp_path / "d.csv")
    assert back.feature_names == ds.feature_names
    np.testing.assert_array_equal(back.X, ds.X)
    np.testing.assert_array_equal(back.y, ds.y)
    np.testing.assert_array_equal(back.dates, ds.dates)
    with pytest.raises(ValueError):
        Dataset(("a",), np.array([[np.nan]]), np.array([1]), np.array(["2012-01-01"], dtype="datetime64[D]"))
    with pytest.raises(ValueError):
        Dataset(("a", "b"), np.zeros((1, 1)), np.array([1]), np.array(["2012-01-01"], dtype="datetime64[D]"))


def test_layout_fixture_class_counts():
    ds = layout_dataset()
    assert (ds.n_hits, ds.n_nonhits) == (253, 147)


# ---------------------------------------------------------------- folds

def test_balanced_folds():
    y = np.r_[np.ones(10, int), np.zeros(10, int)]
    folds = stratified_folds(y, 10, seed=3)
    assert all(sorted(y[f].tolist()) == [0, 1] for f in folds)
    assert [f.tolist() for f in folds] == [f.tolist() for f in stratified_folds(y, 10, seed=3)]


def test_too_few_members():
    with pytest.raises(ValueError):
        stratified_folds(np.r_[np.ones(3, int), np.zeros(20, int)], 5, 0)
    with pytest.raises(ValueError):
        stratified_folds(np.r_[np.ones(3, int), np.zeros(3, int)], 1, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10), st.integers(0, 40), st.integers(0, 40), st.integers(0, 2**31))
def test_folds_partition_and_stratify(k, extra_hits, extra_non, seed):
    n_hit, n_non = k + extra_hits, k + extra_non
    y = np.r_[np.ones(n_hit, int), np.zeros(n_non, int)]
    y = np.random.default_rng(seed).permutation(y)
    folds = stratified_folds(y, k, seed)
    allidx = np.concatenate(folds)
    assert sorted(allidx.tolist()) == list(range(len(y)))
    for i in range(k):
        for j in range(i + 1, k):
            assert not set(folds[i].tolist()) & set(folds[j].tolist())
    for f in folds:
        for cls, total in ((1, n_hit), (0, n_non)):
            assert abs(int(np.sum(y[f] == cls)) - total / k) < 1.0


# ---------------------------------------------------------------- out-of-time split

def test_out_of_time_400():
    train, test = out_of_time_split(layout_dataset(), 0.9)
    assert (len(train), len(test)) == (360, 40)
    assert (train.n_hits, train.n_nonhits, test.n_hits, test.n_nonhits) == (218, 142, 35, 5)
    assert train.dates.max() <= test.dates.min()


def test_out_of_time_half():
    ds = layout_dataset(3, 2, 3, 2)
    train, test = out_of_time_split(ds, 0.5)
    assert (len(train), len(test)) == (5, 5)
    assert train.dates.max() <= test.dates.min()
    with pytest.raises(ValueError):
        out_of_time_split(ds, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.floats(0.05, 0.95), st.integers(0, 1000))
def test_out_of_time_concatenation_is_sorted_input(n, frac, seed):
    rng = np.random.default_rng(seed)
    dates = np.datetime64("2010-01-01") + rng.integers(0, 50, n)
    ds = Dataset(("x",), rng.normal(size=(n, 1)), rng.integers(0, 2, n), dates)
    train, test = out_of_time_split(ds, frac)
    assert len(train) == int(np.floor(n * frac + 1e-9))
    joined = np.r_[train.dates, test.dates]
    np.testing.assert_array_equal(joined, np.sort(ds.dates))
    np.testing.assert_array_equal(np.sort(np.r_[train.X[:, 0], test.X[:, 0]]), np.sort(ds.X[:, 0]))
