"""Model descriptions and the fitted standardise → select → classify chain."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import preprocess
from .classifiers import (
    c45_fit, grid_search_svm, logistic_fit, model_from_dict, nb_fit, ripper_fit, smo_fit,
)
from .classifiers.base import Model
from .classifiers.svm import KernelSpec
from .datamodel import Dataset
from .preprocess import FeatureSubset, GaConfig, Standardizer
from .seeding import derive_seed


@dataclass(frozen=True)
class ModelSpec:
    """A named classifier configuration; ``fit`` trains it on standardised data.

    ``options`` is a tuple of (key, value) pairs forwarded to the fitter. SVM
    specs also understand ``tune``, ``neighborhood``, ``C_grid`` and
    ``param_grid`` (grid search) or ``d``/``gamma``/``C`` when untuned.
    """

    name: str
    kind: str
    options: tuple = ()

    def fit(self, X, y, seed: int, feature_names: Sequence[str] | None = None) -> Model:
        opts = dict(self.options)
        if self.kind == "c45":
            return c45_fit(X, y, **opts)
        if self.kind == "ripper":
            return ripper_fit(X, y, seed=seed, feature_names=feature_names, **opts)
        if self.kind == "naive_bayes":
            return nb_fit(X, y, **opts)
        if self.kind == "logistic":
            return logistic_fit(X, y, **opts)
        if self.kind in ("svm_poly", "svm_rbf"):
            kind = "polynomial" if self.kind == "svm_poly" else "rbf"
            tol = opts.get("tol", 1e-3)
            if opts.get("tune", True):
                grids = {k: opts[k] for k in ("C_grid", "param_grid") if k in opts}
                kernel, C = grid_search_svm(X, y, kind, seed=seed, tol=tol,
                                            neighborhood=opts.get("neighborhood", 8), **grids)
            else:
                kernel = KernelSpec.polynomial(opts.get("d", 1)) if kind == "polynomial" \
                    else KernelSpec.rbf(opts.get("gamma", 0.01))
                C = opts.get("C", 1.0)
            return smo_fit(X, y, kernel, C, tol)
        raise ValueError(f"unknown model kind {self.kind!r}")


DEFAULT_SPECS = {
    "c45": ModelSpec("C4.5", "c45"),
    "ripper": ModelSpec("RIPPER", "ripper"),
    "nb": ModelSpec("Naive Bayes", "naive_bayes"),
    "logistic": ModelSpec("Logistic regression", "logistic"),
    "svm-poly": ModelSpec("SVM (Polynomial)", "svm_poly"),
    "svm-rbf": ModelSpec("SVM (RBF)", "svm_rbf"),
}


def get_specs(names: Sequence[str]) -> list[ModelSpec]:
    out = []
    for n in names:
        key = n.strip().lower()
        if key not in DEFAULT_SPECS:
            raise ValueError(f"unknown model {n!r}; choose from {', '.join(DEFAULT_SPECS)}")
        out.append(DEFAULT_SPECS[key])
    return out


@dataclass
class FittedPipeline:
    feature_names: tuple[str, ...]
    standardizer: Standardizer
    selected: np.ndarray
    model: Model
    name: str = ""

    def transform(self, X) -> np.ndarray:
        return self.standardizer.transform(np.atleast_2d(X))[:, self.selected]

    def score(self, X) -> np.ndarray:
        return self.model.score(self.transform(X))

    def predict(self, X) -> np.ndarray:
        return self.model.predict(self.transform(X))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "feature_names": list(self.feature_names),
            "standardizer": self.standardizer.to_dict(),
            "selected": [int(i) for i in self.selected],
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedPipeline":
        return cls(tuple(d["feature_names"]), Standardizer.from_dict(d["standardizer"]),
                   np.asarray(d["selected"], dtype=int), model_from_dict(d["model"]), d.get("name", ""))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FittedPipeline":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class Preparation:
    """Standardiser and feature subset fitted on one training partition."""

    standardizer: Standardizer
    selected: np.ndarray
    subset: FeatureSubset | None = field(default=None, repr=False)


def prepare(X_train, y_train, with_fs: bool, ga_seed: int, ga: GaConfig | None = None) -> Preparation:
    st = preprocess.standardize_fit(X_train)
    if not with_fs:
        return Preparation(st, np.arange(np.shape(X_train)[1]))
    ga = GaConfig(seed=ga_seed) if ga is None else GaConfig(**{**vars(ga), "seed": ga_seed})
    subset = preprocess.genetic_select(preprocess.standardize_apply(st, X_train), y_train, ga)
    return Preparation(st, subset.indices, subset)


def fit_pipeline(dataset: Dataset, spec: ModelSpec, seed: int, with_fs: bool = True,
                 ga: GaConfig | None = None) -> FittedPipeline:
    prep = prepare(dataset.X, dataset.y, with_fs, derive_seed(seed, "final", "ga"), ga)
    Z = preprocess.standardize_apply(prep.standardizer, dataset.X)[:, prep.selected]
    names = [dataset.feature_names[i] for i in prep.selected]
    model = spec.fit(Z, dataset.y, derive_seed(seed, "final", "model", spec.kind), names)
    return FittedPipeline(dataset.feature_names, prep.standardizer, prep.selected, model, spec.name)
