"""Standardisation and correlation-based feature-subset selection by genetic search."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, X) -> np.ndarray:
        return standardize_apply(self, X)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["std"], dtype=float))


def standardize_fit(X) -> Standardizer:
    """Per-column population mean and standard deviation of the training rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) < 2:
        raise ValueError("standardisation needs at least two training rows")
    mean = X.mean(axis=0)
    std = np.sqrt(np.mean((X - mean) ** 2, axis=0))
    return Standardizer(mean, std)


def standardize_apply(st: Standardizer, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    safe = np.where(st.std > 0, st.std, 1.0)
    Z = (X - st.mean) / safe
    Z[..., st.std <= 0] = 0.0
    return Z


# ---------------------------------------------------------------- correlations

def feature_class_correlation(column, labels) -> float:
    """Point-biserial correlation of a column with the 0/1 class encoding."""
    x = np.asarray(column, dtype=float)
    y = np.asarray(labels, dtype=float)
    if len(np.unique(y)) < 2:
        raise ValueError("both classes must be present")
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    if sxx == 0.0:
        return 0.0
    yc = y - y.mean()
    r = float(np.dot(xc, yc) / math.sqrt(sxx * float(np.dot(yc, yc))))
    return max(-1.0, min(1.0, r))


def correlation_tables(X, y) -> tuple[np.ndarray, np.ndarray]:
    """Absolute feature-class correlations and the absolute feature-feature matrix.

    Zero-variance columns correlate 0 with everything.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Xc = X - X.mean(axis=0)
    norms = np.sqrt(np.sum(Xc ** 2, axis=0))
    ok = norms > 0
    U = np.zeros_like(Xc)
    U[:, ok] = Xc[:, ok] / norms[ok]
    yc = y - y.mean()
    yn = math.sqrt(float(np.dot(yc, yc)))
    if yn == 0:
        raise ValueError("both classes must be present")
    rcf = np.clip(np.abs(U.T @ (yc / yn)), 0.0, 1.0)
    rff = np.clip(np.abs(U.T @ U), 0.0, 1.0)
    return rcf, rff


def cfs_merit(subset, rcf, rff) -> float:
    """Correlation-based subset merit ``k*rcf_mean / sqrt(k + k(k-1)*rff_mean)``.

    ``subset`` is a boolean mask or a sequence of column indices.
    """
    idx = np.asarray(subset)
    if idx.dtype == bool:
        idx = np.flatnonzero(idx)
    k = len(idx)
    if k == 0:
        raise ValueError("subset must contain at least one feature")
    rcf = np.abs(np.asarray(rcf, dtype=float))
    r_cf = float(rcf[idx].mean())
    if k == 1:
        r_ff = 0.0
    else:
        sub = np.abs(np.asarray(rff, dtype=float)[np.ix_(idx, idx)])
        r_ff = (float(sub.sum()) - float(np.trace(sub))) / (k * (k - 1))
    return k * r_cf / math.sqrt(k + k * (k - 1) * r_ff)


# ---------------------------------------------------------------- genetic search

@dataclass(frozen=True)
class GaConfig:
    seed: int
    population_size: int = 20
    generations: int = 20
    crossover_prob: float = 0.6
    mutation_prob: float = 0.033

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")
        for p in (self.crossover_prob, self.mutation_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class FeatureSubset:
    mask: np.ndarray
    merit: float
    history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def names(self, feature_names: Sequence[str]) -> list[str]:
        return [feature_names[i] for i in self.indices]

    def to_json(self, path: str | Path, feature_names: Sequence[str]) -> None:
        Path(path).write_text(json.dumps(self.names(feature_names), indent=1) + "\n", encoding="utf-8")


def genetic_select(X, y, config: GaConfig) -> FeatureSubset:
    """Search feature subsets with a generational GA maximising CFS merit.

    Roulette-wheel parent selection, single-point crossover, per-bit
    mutation and an elite of one. Empty chromosomes are repaired by
    switching on one random bit. ``history`` holds the best-ever merit
    after each generation (entry 0 is the initial population).
    """
    X = np.asarray(X, dtype=float)
    rcf, rff = correlation_tables(X, y)
    n_feat = X.shape[1]
    rng = np.random.default_rng(config.seed)
    cache: dict[bytes, float] = {}

    def repair(chrom):
        if not chrom.any():
            chrom[rng.integers(n_feat)] = True
        return chrom

    def fitness(chrom) -> float:
        key = np.packbits(chrom).tobytes()
        if key not in cache:
            cache[key] = cfs_merit(chrom, rcf, rff)
        return cache[key]

    pop = [repair(rng.random(n_feat) < 0.5) for _ in range(config.population_size)]
    fit = np.array([fitness(c) for c in pop])
    best_i = int(np.argmax(fit))
    best, best_fit = pop[best_i].copy(), float(fit[best_i])
    history = [best_fit]

    for _ in range(config.generations):
        total = fit.sum()
        probs = fit / total if total > 0 else np.full(len(fit), 1.0 / len(fit))
        children = [best.copy()]
        while len(children) < config.population_size:
            pa, pb = rng.choice(len(pop), size=2, p=probs)
            a, b = pop[pa].copy(), pop[pb].copy()
            if n_feat > 1 and rng.random() < config.crossover_prob:
                cut = int(rng.integers(1, n_feat))
                a[cut:], b[cut:] = pop[pb][cut:], pop[pa][cut:]
            for child in (a, b):
                flips = rng.random(n_feat) < config.mutation_prob
                child ^= flips
                children.append(repair(child))
        pop = children[: config.population_size]
        fit = np.array([fitness(c) for c in pop])
        gen_i = int(np.argmax(fit))
        if fit[gen_i] > best_fit:
            best, best_fit = pop[gen_i].copy(), float(fit[gen_i])
        history.append(best_fit)

    return FeatureSubset(best, best_fit, tuple(history))
