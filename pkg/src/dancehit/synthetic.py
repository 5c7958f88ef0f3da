"""Seeded synthetic chart listings and song analyses for tests and demos.

Scenarios:

``separable``
    timbre dimensions 1-3 are shifted up for songs peaking in the top 20
    and down otherwise, so hits and non-hits separate cleanly.
``noise``
    every feature is drawn independently of the chart position.
``trend``
    songs span 1985-2013; loudness rises exactly 0.5 dB per year and tempo
    and the first timbre coefficient drift upward.
"""

from __future__ import annotations

import datetime as dt
import json
from pathlib import Path

import numpy as np

from .datamodel import ChartListing, write_chart_csv
from .seeding import derive_seed

SCENARIOS = ("separable", "noise", "trend")
LOUDNESS_SLOPE = 0.5  # dB per year in the trend scenario
_HITLIKE_MAX_PEAK = 20


def _r(x, nd=6):
    return np.round(np.asarray(x, dtype=float), nd).tolist()


def _song(rng, scenario: str, hitlike: bool, year: int) -> dict:
    n_seg = int(rng.integers(40, 80))
    timbre_centre = np.array([45, 10, 5, -5, 0, -8, 2, -3, 1, 0, -1, 2], dtype=float)
    song_centre = timbre_centre + rng.normal(0.0, 1.0, 12)
    tempo = float(rng.normal(124.0, 4.0))
    loudness = float(rng.normal(-7.0, 1.5))
    if scenario == "separable":
        song_centre[:3] += 6.0 if hitlike else -6.0
    elif scenario == "trend":
        k = year - 1985
        loudness = -12.0 + LOUDNESS_SLOPE * k
        tempo = 115.0 + 0.3 * k + float(rng.normal(0.0, 1.0))
        song_centre[0] += 0.4 * k
    segments = song_centre + rng.normal(0.0, 6.0, (n_seg, 12)) * rng.uniform(0.5, 1.5, 12)
    n_beats = int(rng.integers(60, 120))
    period = 60.0 / tempo
    gaps = period * (1.0 + rng.normal(0.0, 0.01, n_beats - 1))
    beats = np.concatenate([[float(rng.uniform(0.0, 0.5))], np.abs(gaps) + 1e-3]).cumsum()
    return {
        "duration": round(float(rng.uniform(150.0, 330.0)), 3),
        "tempo": round(tempo, 3),
        "time_signature": int(rng.choice([3, 4, 4, 4, 4])),
        "mode": int(rng.integers(0, 2)),
        "key": int(rng.integers(0, 12)),
        "loudness": round(loudness, 6),
        "danceability": round(float(rng.uniform(0.3, 0.9)), 6),
        "energy": round(float(rng.uniform(0.4, 0.95)), 6),
        "segments": [_r(s, 4) for s in segments],
        "beats": _r(beats),
    }


def generate(seed: int, n_songs: int, scenario: str) -> tuple[list[ChartListing], list[dict]]:
    """Chart listings plus one analysis dict (with title and artist) per song."""
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    rng = np.random.default_rng(derive_seed(seed, "synthetic", scenario))
    if scenario == "trend":
        start, span = dt.date(1985, 1, 5), (dt.date(2013, 3, 1) - dt.date(1985, 1, 5)).days
    else:
        start, span = dt.date(2009, 10, 3), (dt.date(2013, 3, 1) - dt.date(2009, 10, 3)).days
    listings, analyses = [], []
    for i in range(n_songs):
        title, artist = f"Song {i:04d}", f"Artist {i % 97:02d}"
        peak = int(rng.integers(1, 41))
        first = start + dt.timedelta(days=int(rng.integers(0, span)))
        n_weeks = int(rng.integers(1, 6))
        positions = [peak] + [int(rng.integers(peak, 41)) for _ in range(n_weeks - 1)]
        rng.shuffle(positions)
        for w, pos in enumerate(positions):
            listings.append(ChartListing(title, artist, pos, first + dt.timedelta(weeks=w)))
        song = _song(rng, scenario, peak <= _HITLIKE_MAX_PEAK, first.year)
        analyses.append({"title": title, "artist": artist, **song})
    return listings, analyses


def write_corpus(out_dir: str | Path, seed: int, n_songs: int, scenario: str) -> Path:
    """Write ``charts.csv`` and ``analyses/*.json`` under ``out_dir``."""
    out_dir = Path(out_dir)
    listings, analyses = generate(seed, n_songs, scenario)
    adir = out_dir / "analyses"
    adir.mkdir(parents=True, exist_ok=True)
    write_chart_csv(out_dir / "charts.csv", listings)
    for i, a in enumerate(analyses):
        (adir / f"song_{i:05d}.json").write_text(json.dumps(a, separators=(",", ":")) + "\n", encoding="utf-8")
    return out_dir
