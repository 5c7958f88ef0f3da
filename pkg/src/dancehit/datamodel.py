"""Chart listings, song analyses, gap-labelled datasets and dataset splits."""

from __future__ import annotations

import csv
import datetime as dt
import enum
import json
import logging
import math
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

logger = logging.getLogger(__name__)

HIT = 1
NONHIT = 0
LABEL_NAMES = {HIT: "Hit", NONHIT: "NonHit"}
CHART_HEADER = ("title", "artist", "position", "date")
N_TIMBRE = 12


class Label(enum.Enum):
    HIT = "Hit"
    NONHIT = "NonHit"
    EXCLUDED = "Excluded"


# ---------------------------------------------------------------- dates

def parse_date(text: str) -> dt.date:
    """Parse ``YYYY-MM-DD``; fall back to ``DD/MM/YY`` with a 1970 century pivot."""
    text = text.strip()
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        pass
    m = re.fullmatch(r"(\d{1,2})/(\d{1,2})/(\d{2}|\d{4})", text)
    if m is None:
        raise ValueError(f"unparseable date {text!r}")
    day, month, year = (int(g) for g in m.groups())
    if len(m.group(3)) == 2:
        year += 1900 if year >= 70 else 2000
    return dt.date(year, month, day)


# ---------------------------------------------------------------- song keys

_FEAT_RE = re.compile(r"(?<!\w)(?:featuring|feat\.?|ft\.?)(?!\w)")


def normalize_text(text: str) -> str:
    text = unicodedata.normalize("NFKC", text).lower()
    text = _FEAT_RE.sub("feat", text)
    return " ".join(text.split())


def song_key(title: str, artist: str) -> tuple[str, str]:
    return normalize_text(title), normalize_text(artist)


# ---------------------------------------------------------------- records

@dataclass(frozen=True)
class ChartListing:
    song_title: str
    artist: str
    position: int
    date: dt.date

    def __post_init__(self):
        if self.position < 1:
            raise ValueError(f"chart position must be >= 1, got {self.position}")

    @property
    def song_key(self) -> tuple[str, str]:
        return song_key(self.song_title, self.artist)


@dataclass(frozen=True)
class PeakRecord:
    song_key: tuple[str, str]
    peak_position: int
    first_date: dt.date
    last_date: dt.date


@dataclass(frozen=True)
class SongAnalysis:
    """Track-level analyzer output plus segment timbre and beat onsets."""

    song_key: tuple[str, str]
    duration: float
    tempo: float
    time_signature: int
    mode: int
    key: int
    loudness: float
    danceability: float
    energy: float
    segments: np.ndarray = field(repr=False)
    beats: np.ndarray = field(repr=False)

    def __post_init__(self):
        segments = np.asarray(self.segments, dtype=float)
        if segments.ndim == 1 and segments.size == 0:
            segments = segments.reshape(0, N_TIMBRE)
        beats = np.asarray(self.beats, dtype=float).ravel()
        if segments.ndim != 2 or segments.shape[1] != N_TIMBRE:
            raise ValueError(f"every segment needs {N_TIMBRE} timbre components")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.tempo > 0:
            raise ValueError("tempo must be positive")
        if self.mode not in (0, 1):
            raise ValueError("mode must be 0 (minor) or 1 (major)")
        if not 0 <= self.key <= 11:
            raise ValueError("key must be an integer in 0..11")
        segments.setflags(write=False)
        beats.setflags(write=False)
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "beats", beats)

    @classmethod
    def from_dict(cls, d: Mapping) -> "SongAnalysis":
        return cls(
            song_key=song_key(d["title"], d["artist"]),
            duration=float(d["duration"]),
            tempo=float(d["tempo"]),
            time_signature=int(d["time_signature"]),
            mode=int(d["mode"]),
            key=int(d["key"]),
            loudness=float(d["loudness"]),
            danceability=float(d["danceability"]),
            energy=float(d["energy"]),
            segments=np.asarray(d["segments"], dtype=float),
            beats=np.asarray(d["beats"], dtype=float),
        )

    def to_dict(self, title: str | None = None, artist: str | None = None) -> dict:
        return {
            "title": self.song_key[0] if title is None else title,
            "artist": self.song_key[1] if artist is None else artist,
            "duration": self.duration,
            "tempo": self.tempo,
            "time_signature": self.time_signature,
            "mode": self.mode,
            "key": self.key,
            "loudness": self.loudness,
            "danceability": self.danceability,
            "energy": self.energy,
            "segments": self.segments.tolist(),
            "beats": self.beats.tolist(),
        }


def load_analysis(path: str | Path) -> SongAnalysis:
    with open(path, encoding="utf-8") as fh:
        return SongAnalysis.from_dict(json.load(fh))


def load_analyses(directory: str | Path) -> dict[tuple[str, str], SongAnalysis]:
    """Load every ``*.json`` analysis in ``directory`` keyed by song key.

    Files that fail validation are logged and skipped.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"analysis directory not found: {directory}")
    out = {}
    for path in sorted(directory.glob("*.json")):
        try:
            a = load_analysis(path)
        except (ValueError, KeyError, TypeError) as exc:
            logger.warning("skipping analysis %s: %s", path.name, exc)
            continue
        out[a.song_key] = a
    return out


# ---------------------------------------------------------------- chart ingestion

class ParsedCharts(NamedTuple):
    listings: list[ChartListing]
    skipped: int


def parse_chart_csv(path: str | Path) -> ParsedCharts:
    """Read a chart CSV with header ``title,artist,position,date``.

    Rows whose position or date cannot be parsed are skipped and counted.
    """
    path = Path(path)
    listings = []
    skipped = 0
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip().lower() for h in header) != CHART_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CHART_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                title, artist, position, date = row
                listings.append(ChartListing(title, artist, int(position), parse_date(date)))
            except ValueError as exc:
                logger.warning("%s:%d: skipping row (%s)", path, lineno, exc)
                skipped += 1
    return ParsedCharts(listings, skipped)


def write_chart_csv(path: str | Path, listings: Iterable[ChartListing]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CHART_HEADER)
        for li in listings:
            w.writerow([li.song_title, li.artist, li.position, li.date.isoformat()])


def compute_peaks(listings: Iterable[ChartListing]) -> list[PeakRecord]:
    """One record per normalised song key; peak is the best (lowest) position."""
    acc: dict[tuple[str, str], list] = {}
    for li in listings:
        k = li.song_key
        if k not in acc:
            acc[k] = [li.position, li.date, li.date]
        else:
            rec = acc[k]
            rec[0] = min(rec[0], li.position)
            rec[1] = min(rec[1], li.date)
            rec[2] = max(rec[2], li.date)
    return [PeakRecord(k, *acc[k]) for k in sorted(acc)]


# ---------------------------------------------------------------- gap schemes

@dataclass(frozen=True)
class GapScheme:
    name: str
    hit_max: int
    nonhit_min: int

    def __post_init__(self):
        if not self.hit_max < self.nonhit_min:
            raise ValueError("hit_max must be below nonhit_min")

    def label(self, peak: int) -> Label:
        if peak <= self.hit_max:
            return Label.HIT
        if peak >= self.nonhit_min:
            return Label.NONHIT
        return Label.EXCLUDED


SCHEMES = {
    "D1": GapScheme("D1", 10, 30),
    "D2": GapScheme("D2", 10, 20),
    "D3": GapScheme("D3", 20, 21),
}


def get_scheme(name: str) -> GapScheme:
    try:
        return SCHEMES[name.upper()]
    except KeyError:
        raise ValueError(f"unknown gap scheme {name!r}; choose from {sorted(SCHEMES)}") from None


def label_with_gap(peak: PeakRecord | int, scheme: GapScheme) -> Label:
    position = peak.peak_position if isinstance(peak, PeakRecord) else peak
    return scheme.label(position)


# ---------------------------------------------------------------- datasets

@dataclass(frozen=True)
class Dataset:
    """Feature matrix with 0/1 labels (1 = Hit) and per-instance dates."""

    feature_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    dates: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        names = tuple(self.feature_names)
        if X.ndim != 2 or X.shape[1] != len(names):
            raise ValueError("row width must match the number of feature names")
        if not (len(X) == len(y) == len(dates)):
            raise ValueError("rows, labels and dates must have equal length")
        if not np.all(np.isin(y, (HIT, NONHIT))):
            raise ValueError("labels must be 0 (NonHit) or 1 (Hit)")
        if not np.all(np.isfinite(X)):
            raise ValueError("dataset contains non-finite values")
        for arr in (X, y, dates):
            arr.setflags(write=False)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_hits(self) -> int:
        return int(self.y.sum())

    @property
    def n_nonhits(self) -> int:
        return len(self) - self.n_hits

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.feature_names, self.X[idx], self.y[idx], self.dates[idx])

    def select_features(self, columns: Sequence[int]) -> "Dataset":
        columns = list(columns)
        return Dataset(tuple(self.feature_names[c] for c in columns), self.X[:, columns], self.y, self.dates)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([*self.feature_names, "label", "date"])
            for row, label, date in zip(self.X, self.y, self.dates):
                w.writerow([*(repr(float(v)) for v in row), LABEL_NAMES[int(label)], str(date)])

    @classmethod
    def from_csv(cls, path: str | Path) -> "Dataset":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[-2:] != ["label", "date"]:
                raise ValueError(f"{path}: last two columns must be label,date")
            rows, labels, dates = [], [], []
            codes = {v: k for k, v in LABEL_NAMES.items()}
            for row in reader:
                rows.append([float(v) for v in row[:-2]])
                labels.append(codes[row[-2]])
                dates.append(row[-1])
        names = tuple(header[:-2])
        X = np.asarray(rows, dtype=float).reshape(len(rows), len(names))
        return cls(names, X, np.asarray(labels, dtype=int), np.asarray(dates, dtype="datetime64[D]"))


@dataclass
class DropReport:
    excluded: int = 0
    missing_analysis: int = 0
    unusable_analysis: int = 0
    kept: int = 0

    def as_dict(self) -> dict:
        return dict(vars(self))


def assemble_dataset(
    peaks: Iterable[PeakRecord],
    analyses: Mapping[tuple[str, str], SongAnalysis],
    scheme: GapScheme,
    feature_fn: Callable[[SongAnalysis], np.ndarray] | None = None,
    feature_names: Sequence[str] | None = None,
) -> tuple[Dataset, DropReport]:
    """Label peaks under ``scheme`` and attach feature vectors.

    Songs in the gap, songs without an analysis and songs whose analysis
    cannot be turned into features are dropped and counted. Each instance
    is dated by its first chart appearance.
    """
    if feature_fn is None:
        from .features import FEATURE_NAMES, feature_vector
        feature_fn, feature_names = feature_vector, FEATURE_NAMES
    report = DropReport()
    rows, labels, dates = [], [], []
    for peak in peaks:
        label = label_with_gap(peak, scheme)
        if label is Label.EXCLUDED:
            report.excluded += 1
            continue
        analysis = analyses.get(peak.song_key)
        if analysis is None:
            report.missing_analysis += 1
            continue
        try:
            vec = np.asarray(feature_fn(analysis), dtype=float)
        except ValueError as exc:
            logger.warning("dropping %s: %s", peak.song_key, exc)
            report.unusable_analysis += 1
            continue
        rows.append(vec)
        labels.append(HIT if label is Label.HIT else NONHIT)
        dates.append(np.datetime64(peak.first_date, "D"))
    if not rows:
        raise ValueError(f"no usable songs left under scheme {scheme.name}")
    report.kept = len(rows)
    names = feature_names if feature_names is not None else [f"f{i}" for i in range(len(rows[0]))]
    return Dataset(tuple(names), np.vstack(rows), np.asarray(labels), np.asarray(dates)), report


# ---------------------------------------------------------------- splits

def stratified_folds(y, k: int, seed: int) -> list[np.ndarray]:
    """Partition indices into ``k`` folds preserving class proportions.

    Each class's members are shuffled and dealt round-robin; the deal for
    the next class continues where the previous one stopped so fold sizes
    stay within one of each other.
    """
    y = np.asarray(getattr(y, "y", y))
    if k < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        if len(members) < k:
            raise ValueError(f"class {cls} has {len(members)} members, fewer than k={k}")
        members = rng.permutation(members)
        for i, idx in enumerate(members):
            buckets[(offset + i) % k].append(int(idx))
        offset = (offset + len(members)) % k
    return [np.sort(np.asarray(b, dtype=int)) for b in buckets]


def out_of_time_split(dataset: Dataset, train_fraction: float) -> tuple[Dataset, Dataset]:
    """Oldest ``floor(n * train_fraction)`` instances train, the rest test."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    order = np.argsort(dataset.dates, kind="stable")
    n_train = int(math.floor(len(dataset) * train_fraction + 1e-9))
    return dataset.subset(order[:n_train]), dataset.subset(order[n_train:])
