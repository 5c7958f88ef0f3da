"""Builders shared by the test modules."""

from __future__ import annotations

import datetime as dt

import numpy as np

from dancehit.datamodel import Dataset, SongAnalysis, assemble_dataset, compute_peaks, get_scheme, song_key
from dancehit.features import FEATURE_NAMES
from dancehit.synthetic import generate


def analysis_dict(rng=None, n_seg=20, n_beats=30, title="Song", artist="Artist", **overrides) -> dict:
    rng = np.random.default_rng(0) if rng is None else rng
    beats = np.cumsum(np.full(n_beats, 0.5)) + rng.uniform(0, 0.01, n_beats)
    d = {
        "title": title, "artist": artist,
        "duration": 200.0, "tempo": 120.0, "time_signature": 4, "mode": 1, "key": 5,
        "loudness": -6.5, "danceability": 0.7, "energy": 0.8,
        "segments": rng.normal(0, 5, (n_seg, 12)).round(4).tolist(),
        "beats": np.sort(beats).tolist(),
    }
    d.update(overrides)
    return d


def synthetic_dataset(seed=0, n_songs=160, scenario="separable", scheme="D1") -> Dataset:
    listings, analyses = generate(seed, n_songs, scenario)
    an = {song_key(a["title"], a["artist"]): SongAnalysis.from_dict(a) for a in analyses}
    return assemble_dataset(compute_peaks(listings), an, get_scheme(scheme))[0]


def layout_dataset(train_hits=218, train_non=142, test_hits=35, test_non=5, n_features=3, seed=0) -> Dataset:
    """Dated 0/1 dataset whose oldest block and newest block have the given class counts.

    With the defaults the full set has 253 hits and 147 non-hits, and a
    90/10 out-of-time split yields 218/142 for training and 35/5 for testing.
    """
    rng = np.random.default_rng(seed)
    early = rng.permutation(np.r_[np.ones(train_hits, int), np.zeros(train_non, int)])
    late = rng.permutation(np.r_[np.ones(test_hits, int), np.zeros(test_non, int)])
    y = np.r_[early, late]
    start = np.datetime64("2009-10-03")
    dates = start + np.arange(len(y)) * 3
    order = rng.permutation(len(y))  # stored out of date order on purpose
    X = rng.normal(size=(len(y), n_features)) + y[:, None]
    return Dataset(tuple(f"f{i}" for i in range(n_features)), X[order], y[order], dates[order])


def tiny_feature_dataset(n_hits=5, n_non=5, seed=0) -> Dataset:
    """Full 138-feature schema, a handful of rows, separable on the first timbre mean."""
    rng = np.random.default_rng(seed)
    y = np.r_[np.ones(n_hits, int), np.zeros(n_non, int)]
    X = rng.normal(size=(len(y), len(FEATURE_NAMES)))
    X[:, FEATURE_NAMES.index("T1mean")] += 4 * y
    dates = np.datetime64("2012-01-01") + np.arange(len(y)) * 7
    return Dataset(FEATURE_NAMES, X, y, dates)


def chart_date(i: int) -> dt.date:
    return dt.date(2012, 1, 7) + dt.timedelta(weeks=i)
