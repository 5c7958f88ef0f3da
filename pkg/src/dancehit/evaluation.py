"""Metrics, repeated stratified cross-validation and Wilcoxon model comparison."""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import norm, rankdata

from . import preprocess
from .datamodel import Dataset, stratified_folds
from .pipeline import ModelSpec, Preparation, prepare
from .preprocess import GaConfig
from .seeding import derive_seed

EXACT_MAX_N = 25


# ---------------------------------------------------------------- confusion / accuracy

@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int  # hit classified as hit
    fn: int  # hit classified as non-hit
    fp: int  # non-hit classified as hit
    tn: int  # non-hit classified as non-hit

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @property
    def hit_recall(self) -> float:
        return self.tp / (self.tp + self.fn)

    @property
    def nonhit_recall(self) -> float:
        return self.tn / (self.tn + self.fp)

    def table(self) -> str:
        return (f"{'a':>6} {'b':>6}   <- classified as\n"
                f"{self.tp:>6} {self.fn:>6}   a = hit\n"
                f"{self.fp:>6} {self.tn:>6}   b = non-hit")


def confusion_and_accuracy(labels, predictions) -> tuple[ConfusionMatrix, float]:
    y = np.asarray(labels).astype(int)
    p = np.asarray(predictions).astype(int)
    if len(y) != len(p):
        raise ValueError("labels and predictions differ in length")
    if len(y) == 0:
        raise ValueError("nothing to evaluate")
    cm = ConfusionMatrix(
        tp=int(np.sum((y == 1) & (p == 1))),
        fn=int(np.sum((y == 1) & (p == 0))),
        fp=int(np.sum((y == 0) & (p == 1))),
        tn=int(np.sum((y == 0) & (p == 0))),
    )
    return cm, cm.accuracy


# ---------------------------------------------------------------- ROC / AUC

@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray

    def area(self) -> float:
        return float(np.sum(np.diff(self.fpr) * (self.tpr[1:] + self.tpr[:-1]) / 2.0))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fpr", "tpr"])
            for a, b in zip(self.fpr, self.tpr):
                w.writerow([repr(float(a)), repr(float(b))])


def _check_binary(y):
    y = np.asarray(y).astype(int)
    n_hit = int(np.sum(y == 1))
    if n_hit == 0 or n_hit == len(y):
        raise ValueError("ROC analysis needs both classes")
    return y, n_hit, len(y) - n_hit


def auc_score(labels, scores) -> float:
    """Probability a random hit outscores a random non-hit, ties counting half."""
    y, n_hit, n_non = _check_binary(labels)
    ranks = rankdata(np.asarray(scores, dtype=float))
    u = float(ranks[y == 1].sum()) - n_hit * (n_hit + 1) / 2.0
    return u / (n_hit * n_non)


def roc_curve(labels, scores) -> RocCurve:
    """Threshold sweep from the highest score down; tied scores move together."""
    y, n_hit, n_non = _check_binary(labels)
    s = np.asarray(scores, dtype=float)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), len(s) - 1]
    tps = np.cumsum(y)[last]
    fps = (last + 1) - tps
    return RocCurve(np.r_[0.0, fps / n_non], np.r_[0.0, tps / n_hit])


def roc_auc(labels, scores) -> tuple[RocCurve, float]:
    return roc_curve(labels, scores), auc_score(labels, scores)


# ---------------------------------------------------------------- Wilcoxon

def _signed_rank_parts(a, b):
    d = np.asarray(a, dtype=float) - (0.0 if b is None else np.asarray(b, dtype=float))
    d = d[d != 0]
    ranks = rankdata(np.abs(d))
    return d, ranks


def wilcoxon_signed_rank(a, b=None, exact_max_n: int = EXACT_MAX_N) -> float:
    """Two-sided p-value of the Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped and tied magnitudes get average ranks.
    Up to ``exact_max_n`` pairs the null distribution of the positive rank
    sum over all sign assignments is tabulated exactly; above that a normal
    approximation with continuity and tie correction is used.
    """
    if b is not None and len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    d, ranks = _signed_rank_parts(a, b)
    n = len(d)
    if n == 0:
        return 1.0
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    if n <= exact_max_n:
        # ranks are multiples of 1/2, so doubled ranks are exact integers
        r2 = np.rint(2 * ranks).astype(np.int64)
        counts = np.zeros(int(r2.sum()) + 1, dtype=np.int64)
        counts[0] = 1
        for r in r2:
            shifted = np.zeros_like(counts)
            shifted[r:] = counts[:-r]
            counts = counts + shifted
        n_extreme = int(counts[: int(round(2 * w)) + 1].sum())
        return min(1.0, 2.0 * n_extreme / 2.0 ** n)
    mu = n * (n + 1) / 4.0
    _, t = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(t ** 3 - t)) / 48.0
    if var <= 0:
        return 1.0
    z = max(abs(w - mu) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, 2.0 * float(norm.sf(z)))


# ---------------------------------------------------------------- cross-validation

@dataclass
class CvResult:
    name: str
    auc: np.ndarray        # (runs, folds)
    accuracy: np.ndarray   # (runs, folds)
    oof_scores: np.ndarray = field(repr=False)       # (runs, n) out-of-fold scores
    oof_predictions: np.ndarray = field(repr=False)  # (runs, n)
    labels: np.ndarray = field(repr=False)
    partition_hash: str = ""

    @property
    def runs(self) -> int:
        return self.auc.shape[0]

    @property
    def folds(self) -> int:
        return self.auc.shape[1]

    @property
    def mean_auc(self) -> float:
        return float(np.mean(np.sort(self.auc, axis=None)))

    @property
    def std_auc(self) -> float:
        return float(np.std(self.auc))

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(np.sort(self.accuracy, axis=None)))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.accuracy))

    def confusion(self, run: int = 0) -> ConfusionMatrix:
        return confusion_and_accuracy(self.labels, self.oof_predictions[run])[0]

    def roc(self, run: int = 0) -> RocCurve:
        return roc_curve(self.labels, self.oof_scores[run])


def _partition_hash(partitions) -> str:
    h = hashlib.sha256()
    for run in partitions:
        for fold in run:
            h.update(np.asarray(fold, dtype=np.int64).tobytes())
            h.update(b"|")
        h.update(b"#")
    return h.hexdigest()


class CrossValidator:
    """Fold partitions and per-fold preprocessing shared by every model spec.

    Fold partitions depend only on (seed, run), preprocessing on
    (seed, run, fold), so models evaluated through one validator see
    identical training/test splits and identical feature subsets.
    """

    def __init__(self, dataset: Dataset, runs: int, folds: int, seed: int,
                 with_feature_selection: bool = False, ga: GaConfig | None = None,
                 selection_scope: str = "fold"):
        if selection_scope not in ("fold", "global"):
            raise ValueError("selection_scope must be 'fold' or 'global'")
        self.dataset = dataset
        self.runs, self.folds, self.seed = runs, folds, seed
        self.with_fs = with_feature_selection
        self.ga = ga
        self.scope = selection_scope
        self.partitions = [stratified_folds(dataset.y, folds, derive_seed(seed, "folds", r))
                           for r in range(runs)]
        self.partition_hash = _partition_hash(self.partitions)
        self._prep: dict[tuple[int, int], Preparation] = {}
        self._global_selected = None
        if self.with_fs and self.scope == "global":
            gp = prepare(dataset.X, dataset.y, True, derive_seed(seed, "global", "ga"), ga)
            self._global_selected = gp.selected

    def split(self, run: int, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = self.partitions[run][fold]
        mask = np.ones(len(self.dataset), dtype=bool)
        mask[test] = False
        return np.flatnonzero(mask), test

    def preparation(self, run: int, fold: int) -> Preparation:
        key = (run, fold)
        if key not in self._prep:
            train, _ = self.split(run, fold)
            X, y = self.dataset.X[train], self.dataset.y[train]
            if self._global_selected is not None:
                prep = Preparation(preprocess.standardize_fit(X), self._global_selected)
            else:
                prep = prepare(X, y, self.with_fs, derive_seed(self.seed, "ga", run, fold), self.ga)
            self._prep[key] = prep
        return self._prep[key]

    def evaluate(self, spec: ModelSpec) -> CvResult:
        ds = self.dataset
        auc = np.zeros((self.runs, self.folds))
        acc = np.zeros((self.runs, self.folds))
        oof_s = np.zeros((self.runs, len(ds)))
        oof_p = np.zeros((self.runs, len(ds)), dtype=int)
        for r in range(self.runs):
            for f in range(self.folds):
                train, test = self.split(r, f)
                prep = self.preparation(r, f)
                Ztr = preprocess.standardize_apply(prep.standardizer, ds.X[train])[:, prep.selected]
                Zte = preprocess.standardize_apply(prep.standardizer, ds.X[test])[:, prep.selected]
                names = [ds.feature_names[i] for i in prep.selected]
                model = spec.fit(Ztr, ds.y[train], derive_seed(self.seed, "model", spec.kind, r, f), names)
                scores = model.score(Zte)
                preds = model.predict(Zte)
                oof_s[r, test] = scores
                oof_p[r, test] = preds
                auc[r, f] = auc_score(ds.y[test], scores)
                acc[r, f] = confusion_and_accuracy(ds.y[test], preds)[1]
        return CvResult(spec.name, auc, acc, oof_s, oof_p, ds.y.copy(), self.partition_hash)


def repeated_cv(dataset: Dataset, spec: ModelSpec, runs: int = 10, folds: int = 10, seed: int = 0,
                with_feature_selection: bool = False, ga: GaConfig | None = None,
                selection_scope: str = "fold") -> CvResult:
    """Average of ``runs`` stratified ``folds``-fold cross-validations.

    Standardisation and feature selection are fitted on each training
    partition only (unless ``selection_scope='global'``).
    """
    cv = CrossValidator(dataset, runs, folds, seed, with_feature_selection, ga, selection_scope)
    return cv.evaluate(spec)


# ---------------------------------------------------------------- model comparison

def significance_flag(p: float | None) -> str:
    if p is None:
        return "best"
    if p < 0.01:
        return "p<0.01"
    if p <= 0.05:
        return "p<=0.05"
    return "ns"


@dataclass
class SignificanceReport:
    metric: str
    best: str
    p_values: dict[str, float | None]

    @property
    def flags(self) -> dict[str, str]:
        return {name: significance_flag(p) for name, p in self.p_values.items()}


def _significance(results: dict[str, CvResult], metric: str) -> SignificanceReport:
    means = {k: getattr(r, f"mean_{metric}") for k, r in results.items()}
    best = max(results, key=lambda k: means[k])
    ref = getattr(results[best], metric).ravel()
    p_values = {}
    for name, res in results.items():
        p_values[name] = None if name == best else wilcoxon_signed_rank(getattr(res, metric).ravel(), ref)
    return SignificanceReport(metric, best, p_values)


@dataclass
class Comparison:
    results: dict[str, CvResult]
    auc: SignificanceReport
    accuracy: SignificanceReport
    with_feature_selection: bool = False


def compare_models(dataset: Dataset, specs: Sequence[ModelSpec], runs: int = 10, folds: int = 10,
                   seed: int = 0, with_feature_selection: bool = False, ga: GaConfig | None = None,
                   selection_scope: str = "fold") -> Comparison:
    """Evaluate every spec on the same partitions and test each against the best.

    AUC and accuracy are ranked and tested separately; the pairing unit is
    the per-fold score.
    """
    if len(specs) < 2:
        raise ValueError("comparison needs at least two model specs")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        names = [f"{s.name}#{i}" for i, s in enumerate(specs)]
    cv = CrossValidator(dataset, runs, folds, seed, with_feature_selection, ga, selection_scope)
    results = {}
    for name, spec in zip(names, specs):
        res = cv.evaluate(spec)
        res.name = name
        results[name] = res
    hashes = {r.partition_hash for r in results.values()}
    assert len(hashes) == 1, "models were not evaluated on identical partitions"
    return Comparison(results, _significance(results, "auc"), _significance(results, "accuracy"),
                      with_feature_selection)


# ---------------------------------------------------------------- reporting

def _fmt(x: float) -> str:
    return f"{x:.6f}"


def results_rows(comparisons: Sequence[Comparison], metric: str) -> tuple[list[str], list[list[str]]]:
    """Rows per model, one (mean, std, p, flag) group per comparison column."""
    header = ["model"]
    for c in comparisons:
        tag = "fs" if c.with_feature_selection else "nofs"
        header += [f"{tag}_mean", f"{tag}_std", f"{tag}_p", f"{tag}_flag"]
    names = list(comparisons[0].results)
    rows = []
    for name in names:
        row = [name]
        for c in comparisons:
            res = c.results[name]
            rep = c.auc if metric == "auc" else c.accuracy
            p = rep.p_values[name]
            row += [_fmt(getattr(res, f"mean_{metric}")), _fmt(getattr(res, f"std_{metric}")),
                    "" if p is None else f"{p:.6g}", rep.flags[name]]
        rows.append(row)
    return header, rows


def write_results_csv(path: str | Path, comparisons: Sequence[Comparison], metric: str) -> None:
    header, rows = results_rows(comparisons, metric)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def format_results_text(comparisons: Sequence[Comparison], metric: str) -> str:
    header, rows = results_rows(comparisons, metric)
    table = [header] + rows
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in table) + "\n"
