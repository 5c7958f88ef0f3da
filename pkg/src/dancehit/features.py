"""Basic analyzer features, temporal descriptive statistics and yearly trends."""

from __future__ import annotations

import csv
import datetime as dt
from collections import defaultdict
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable

import numpy as np

from .datamodel import N_TIMBRE, SongAnalysis

BASIC_FEATURES = (
    "duration", "tempo", "time_signature", "mode", "key", "loudness", "danceability", "energy",
)
# Suffixes in DescriptiveStats field order; e.g. T1mean, T880perc, Beatdiffrange.
STAT_SUFFIXES = ("mean", "var", "skewness", "kurtosis", "stdev", "80perc", "min", "max", "range", "median")


@dataclass(frozen=True)
class DescriptiveStats:
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    stdev: float
    p80: float
    min: float
    max: float
    range: float
    median: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


assert len(fields(DescriptiveStats)) == len(STAT_SUFFIXES)


def _percentile(sorted_x: np.ndarray, q: float) -> float:
    # linear interpolation between closest ranks, zero-based position q*(n-1)
    pos = q * (len(sorted_x) - 1)
    lo = int(np.floor(pos))
    hi = min(lo + 1, len(sorted_x) - 1)
    return float(sorted_x[lo] + (pos - lo) * (sorted_x[hi] - sorted_x[lo]))


def descriptive_stats(series) -> DescriptiveStats:
    """Population moments and order statistics of a 1-D series.

    Kurtosis is non-excess (a normal sample gives about 3). A constant
    series gets skewness and kurtosis 0.
    """
    x = np.asarray(series, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("descriptive statistics need at least one value")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    xs = np.sort(x)
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev ** 2))
    lo, hi = float(xs[0]), float(xs[-1])
    if lo == hi:
        m2 = skew = kurt = 0.0
    else:
        # shape moments on rescaled deviations so tiny spreads do not underflow
        z = dev / np.max(np.abs(dev))
        z2 = float(np.mean(z ** 2))
        skew = float(np.mean(z ** 3)) / z2 ** 1.5
        kurt = float(np.mean(z ** 4)) / z2 ** 2
    return DescriptiveStats(
        mean=mean,
        variance=m2,
        skewness=skew,
        kurtosis=kurt,
        stdev=float(np.sqrt(m2)),
        p80=_percentile(xs, 0.8),
        min=lo,
        max=hi,
        range=hi - lo,
        median=_percentile(xs, 0.5),
    )


def beatdiff_series(beats) -> np.ndarray:
    """Time between consecutive beat onsets."""
    b = np.asarray(beats, dtype=float).ravel()
    if b.size < 2:
        raise ValueError(f"unusable beat series: need at least 2 beats, got {b.size}")
    d = np.diff(b)
    if np.any(d <= 0):
        raise ValueError("unusable beat series: beat times must be strictly increasing")
    return d


def _build_names() -> tuple[str, ...]:
    names = list(BASIC_FEATURES)
    for dim in range(1, N_TIMBRE + 1):
        names += [f"T{dim}{s}" for s in STAT_SUFFIXES]
    names += [f"Beatdiff{s}" for s in STAT_SUFFIXES]
    return tuple(names)


FEATURE_NAMES = _build_names()
N_FEATURES = len(FEATURE_NAMES)


def feature_vector(analysis: SongAnalysis) -> np.ndarray:
    """The 138-value feature vector of a song, ordered as ``FEATURE_NAMES``."""
    if len(analysis.segments) == 0:
        raise ValueError("analysis has no segments")
    diffs = beatdiff_series(analysis.beats)
    parts = [np.array([getattr(analysis, name) for name in BASIC_FEATURES], dtype=float)]
    for dim in range(N_TIMBRE):
        parts.append(descriptive_stats(analysis.segments[:, dim]).as_array())
    parts.append(descriptive_stats(diffs).as_array())
    vec = np.concatenate(parts)
    if not np.all(np.isfinite(vec)):
        raise ValueError("analysis produced non-finite features")
    return vec


# ---------------------------------------------------------------- trends

@dataclass(frozen=True)
class TrendLine:
    slope: float
    intercept: float
    n_years: int

    def __call__(self, year):
        return self.intercept + self.slope * np.asarray(year, dtype=float)


def yearly_trend(songs: Iterable[tuple[dt.date, float]]) -> tuple[list[tuple[int, float]], TrendLine]:
    """Average values per calendar year and fit a least-squares line through the means."""
    groups: dict[int, list[float]] = defaultdict(list)
    for date, value in songs:
        year = date.year if hasattr(date, "year") else int(str(date)[:4])
        groups[year].append(float(value))
    if len(groups) < 2:
        raise ValueError("a trend needs values from at least two distinct years")
    years = np.array(sorted(groups), dtype=float)
    means = np.array([np.mean(groups[int(y)]) for y in years])
    xc = years - years.mean()
    slope = float(np.dot(xc, means - means.mean()) / np.dot(xc, xc))
    intercept = float(means.mean() - slope * years.mean())
    per_year = [(int(y), float(m)) for y, m in zip(years, means)]
    return per_year, TrendLine(slope, intercept, len(years))


def write_trend_csv(path: str | Path, feature: str, per_year, line: TrendLine) -> None:
    """Plot-ready ``year,mean`` rows followed by a ``slope,intercept`` record."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", feature])
        w.writerow(["year", "mean"])
        for year, mean in per_year:
            w.writerow([year, repr(mean)])
        w.writerow(["slope", "intercept"])
        w.writerow([repr(line.slope), repr(line.intercept)])
