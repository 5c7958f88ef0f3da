"""Repeated stratified cross-validation of several models with Wilcoxon tests against the best."""

from dancehit.datamodel import SongAnalysis, assemble_dataset, compute_peaks, get_scheme, song_key
from dancehit.evaluation import compare_models, format_results_text
from dancehit.pipeline import get_specs
from dancehit.synthetic import generate

listings, analyses = generate(seed=4, n_songs=300, scenario="separable")
an = {song_key(a["title"], a["artist"]): SongAnalysis.from_dict(a) for a in analyses}
ds = assemble_dataset(compute_peaks(listings), an, get_scheme("D1"))[0]

comp = compare_models(ds, get_specs(["c45", "ripper", "nb", "logistic"]), runs=3, folds=10, seed=0)
print(format_results_text([comp], "auc"))
best = comp.results[comp.auc.best]
print(f"best by AUC: {best.name}; confusion matrix of its first run:\n{best.confusion(0).table()}")
