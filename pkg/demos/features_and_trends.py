"""Feature vectors for a few songs and the yearly loudness trend of a synthetic corpus."""

import numpy as np

from dancehit.datamodel import SongAnalysis, compute_peaks, song_key
from dancehit.features import FEATURE_NAMES, descriptive_stats, feature_vector, yearly_trend
from dancehit.synthetic import generate

listings, analyses = generate(seed=1, n_songs=200, scenario="trend")

print("statistics of 1..5:", descriptive_stats([1, 2, 3, 4, 5]))

first = SongAnalysis.from_dict(analyses[0])
vec = feature_vector(first)
print(f"{len(vec)} features; first ten:")
for name, value in zip(FEATURE_NAMES[:10], vec[:10]):
    print(f"  {name:>15} {value:10.4f}")

loud = FEATURE_NAMES.index("loudness")
by_key = {song_key(a["title"], a["artist"]): SongAnalysis.from_dict(a) for a in analyses}
top10 = [(p.first_date, feature_vector(by_key[p.song_key])[loud])
         for p in compute_peaks(listings) if p.peak_position <= 10]
per_year, line = yearly_trend(top10)
print(f"top-10 loudness over {line.n_years} years: slope {line.slope:.4f} dB/year")
print("first years:", [(y, round(m, 2)) for y, m in per_year[:4]])
print("mean beat interval of the first song:", np.round(vec[FEATURE_NAMES.index("Beatdiffmean")], 4))
