"""Standardise a synthetic dataset and pick a feature subset by genetic CFS search."""

from dancehit.datamodel import SongAnalysis, assemble_dataset, compute_peaks, get_scheme, song_key
from dancehit.preprocess import GaConfig, cfs_merit, correlation_tables, genetic_select, standardize_apply, \
    standardize_fit
from dancehit.synthetic import generate

listings, analyses = generate(seed=2, n_songs=300, scenario="separable")
an = {song_key(a["title"], a["artist"]): SongAnalysis.from_dict(a) for a in analyses}
ds, report = assemble_dataset(compute_peaks(listings), an, get_scheme("D1"))
print(f"D1: {len(ds)} songs, {ds.n_hits} hits, {ds.n_nonhits} non-hits, {report.excluded} in the gap")

Z = standardize_apply(standardize_fit(ds.X), ds.X)
subset = genetic_select(Z, ds.y, GaConfig(seed=0))
print(f"selected {len(subset.indices)} of {Z.shape[1]} features, merit {subset.merit:.4f}")
print("best merit per generation:", [round(h, 4) for h in subset.history])
print("selected:", ", ".join(subset.names(ds.feature_names)[:15]), "...")

rcf, rff = correlation_tables(Z, ds.y)
top = rcf.argsort()[::-1][:3]
print("three most class-correlated features:", [ds.feature_names[i] for i in top],
      "merit together", round(cfs_merit(top, rcf, rff), 4))
