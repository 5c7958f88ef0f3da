from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
_REGISTRY: dict[str, type] = {}


def register(cls):
    _REGISTRY[cls.kind] = cls
    return cls


class Model:
    """Trained binary classifier; class 1 is Hit.

    ``score`` returns a hit score (a probability for probabilistic kinds,
    a signed margin for SVMs) and ``threshold`` is the cut-off applied to it.
    """

    kind = "abstract"
    threshold = 0.5

    def score(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return (self.score(X) >= self.threshold).astype(int)

    def params(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_params(cls, d: dict) -> "Model":
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, "kind": self.kind, **self.params()}


def model_from_dict(d: dict) -> Model:
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {d.get('format_version')!r}")
    try:
        cls = _REGISTRY[d["kind"]]
    except KeyError:
        raise ValueError(f"unknown model kind {d.get('kind')!r}") from None
    return cls.from_params(d)


def save_json(obj: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def as_2d(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X.reshape(1, -1) if X.ndim == 1 else X
