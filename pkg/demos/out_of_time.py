"""Train on the oldest 90% of songs, test on the newest 10%, then save and reload the model."""

import tempfile
from pathlib import Path

from dancehit.datamodel import SongAnalysis, assemble_dataset, compute_peaks, get_scheme, out_of_time_split, \
    song_key
from dancehit.evaluation import confusion_and_accuracy, roc_auc
from dancehit.pipeline import DEFAULT_SPECS, FittedPipeline, fit_pipeline
from dancehit.synthetic import generate

listings, analyses = generate(seed=5, n_songs=400, scenario="separable")
an = {song_key(a["title"], a["artist"]): SongAnalysis.from_dict(a) for a in analyses}
ds = assemble_dataset(compute_peaks(listings), an, get_scheme("D1"))[0]
train, test = out_of_time_split(ds, 0.9)
print(f"train {len(train)} songs up to {train.dates.max()}, test {len(test)} from {test.dates.min()}")

pipe = fit_pipeline(train, DEFAULT_SPECS["logistic"], seed=0)
curve, auc = roc_auc(test.y, pipe.score(test.X))
cm, acc = confusion_and_accuracy(test.y, pipe.predict(test.X))
print(f"logistic on {len(pipe.selected)} selected features: AUC {auc:.3f}, accuracy {acc:.3f}")
print(cm.table())

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "logistic.json"
    pipe.save(path)
    same = (FittedPipeline.load(path).score(test.X) == pipe.score(test.X)).all()
    print(f"reloaded model reproduces every score: {bool(same)}")
