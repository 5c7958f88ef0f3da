"""RIPPER rule induction for two classes.

Rules are learned for the minority class by sequential covering
(grow on two thirds, prune on one third), stopped by a description-length
budget, then revised by a number of optimisation passes. The majority
class becomes the unconditional default rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .base import Model, as_2d, register

DL_SLACK = 64.0  # bits a ruleset may exceed the best description length seen


@dataclass(frozen=True)
class Condition:
    feature: int
    op: str  # "<=" or ">="
    value: float

    def test(self, X: np.ndarray) -> np.ndarray:
        col = X[:, self.feature]
        return col <= self.value if self.op == "<=" else col >= self.value


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]
    consequent: int

    def covers(self, X: np.ndarray) -> np.ndarray:
        mask = np.ones(len(X), dtype=bool)
        for c in self.conditions:
            mask &= c.test(X)
        return mask

    def prefix(self, k: int) -> "Rule":
        return Rule(self.conditions[:k], self.consequent)


def _log2(x: float) -> float:
    return math.log2(x) if x > 0 else 0.0


def subset_dl(t: float, k: float, p: float) -> float:
    """Bits needed to single out ``k`` of ``t`` elements given rate ``p``."""
    bits = -k * _log2(p) if p > 0 else 0.0
    if p < 1:
        bits -= (t - k) * math.log2(1.0 - p)
    return bits


def _theory_dl(rule: Rule, n_all_conds: int) -> float:
    k = len(rule.conditions)
    if k == 0:
        return 0.0
    return 0.5 * (_log2(k) + subset_dl(n_all_conds, k, k / n_all_conds))


def _data_dl(cover, uncover, fp, fn) -> float:
    bits = _log2(cover + uncover + 1)
    if cover > 0:
        bits += subset_dl(cover, fp, fp / cover)
    if uncover > 0:
        bits += subset_dl(uncover, fn, fn / uncover)
    return bits


class _Learner:
    def __init__(self, X, y, pos, folds, min_weight, rng):
        self.X = X
        self.is_pos = y == pos
        self.pos = pos
        self.folds = folds
        self.min_weight = min_weight
        self.rng = rng
        distinct = sum(len(np.unique(X[:, f])) for f in range(X.shape[1]))
        self.n_all_conds = max(2 * distinct, 1)

    # -------------------------------------------------------- description length

    def ruleset_cover(self, rules, idx) -> np.ndarray:
        X = self.X[idx]
        mask = np.zeros(len(idx), dtype=bool)
        for r in rules:
            mask |= r.covers(X)
        return mask

    def total_dl(self, rules) -> float:
        idx = np.arange(len(self.X))
        cov = self.ruleset_cover(rules, idx)
        fp = float(np.sum(cov & ~self.is_pos))
        fn = float(np.sum(~cov & self.is_pos))
        theory = sum(_theory_dl(r, self.n_all_conds) for r in rules)
        return theory + _data_dl(float(cov.sum()), float((~cov).sum()), fp, fn)

    # -------------------------------------------------------- splitting

    def split(self, idx):
        """Stratified grow/prune split; the prune part is one fold in ``folds``."""
        grow, prune = [], []
        for part in (idx[self.is_pos[idx]], idx[~self.is_pos[idx]]):
            part = self.rng.permutation(part)
            n_prune = len(part) // self.folds
            prune.append(part[:n_prune])
            grow.append(part[n_prune:])
        grow, prune = np.sort(np.concatenate(grow)), np.sort(np.concatenate(prune))
        if len(prune) == 0:
            prune = grow
        return grow, prune

    # -------------------------------------------------------- growing

    def _best_condition(self, idx, p0, t0):
        X, P = self.X[idx], self.is_pos[idx]
        n = len(idx)
        base = _log2((p0 + 1.0) / (t0 + 1.0))
        best = None
        for f in range(X.shape[1]):
            order = np.argsort(X[:, f], kind="stable")
            xs, ps = X[order, f], P[order].astype(float)
            last = np.flatnonzero(np.r_[xs[1:] != xs[:-1], True])
            if len(last) < 2:
                continue
            cum = np.cumsum(ps)
            first = np.r_[0, last[:-1] + 1]
            # x <= xs[last[i]] for all but the top value; x >= xs[first[i]] for all but the bottom
            t_le, p_le = last[:-1] + 1.0, cum[last[:-1]]
            t_ge, p_ge = n - first[1:].astype(float), cum[-1] - cum[first[1:] - 1]
            for op, t1, p1, vals in (("<=", t_le, p_le, xs[last[:-1]]), (">=", t_ge, p_ge, xs[first[1:]])):
                ok = (t1 >= self.min_weight) & (p1 > 0)
                if not ok.any():
                    continue
                gains = np.where(ok, p1 * (np.log2((p1 + 1.0) / (t1 + 1.0)) - base), -np.inf)
                i = int(np.argmax(gains))
                if gains[i] > 1e-12 and (best is None or gains[i] > best[0]):
                    best = (float(gains[i]), Condition(f, op, float(vals[i])))
        return None if best is None else best[1]

    def grow_rule(self, idx, start: Rule | None = None) -> Rule:
        rule = start or Rule((), self.pos)
        covered = idx[rule.covers(self.X[idx])]
        while len(covered):
            p0 = float(self.is_pos[covered].sum())
            t0 = float(len(covered))
            if p0 == t0:
                break
            cond = self._best_condition(covered, p0, t0)
            if cond is None:
                break
            rule = Rule(rule.conditions + (cond,), self.pos)
            covered = covered[cond.test(self.X[covered])]
        return rule

    # -------------------------------------------------------- pruning

    def prune_rule(self, rule: Rule, idx) -> Rule:
        """Keep the prefix maximising (p - n) / (p + n) on ``idx``; ties favour shorter."""
        if len(rule.conditions) <= 1:
            return rule
        X, P = self.X[idx], self.is_pos[idx]
        best_k, best_v = len(rule.conditions), -np.inf
        mask = np.ones(len(idx), dtype=bool)
        for k, c in enumerate(rule.conditions, start=1):
            mask &= c.test(X)
            p = float(np.sum(mask & P))
            n = float(np.sum(mask & ~P))
            v = (p - n) / (p + n) if p + n > 0 else -1.0
            if v > best_v:
                best_k, best_v = k, v
        return rule.prefix(best_k)

    def prune_for_ruleset(self, rules, i, candidate: Rule, idx) -> Rule:
        """Prefix of ``candidate`` maximising ruleset accuracy on ``idx`` when placed at ``i``."""
        if len(candidate.conditions) <= 1:
            return candidate
        others = rules[:i] + rules[i + 1:]
        base = self.ruleset_cover(others, idx)
        X, P = self.X[idx], self.is_pos[idx]
        best_k, best_acc = len(candidate.conditions), -1.0
        mask = np.ones(len(idx), dtype=bool)
        for k, c in enumerate(candidate.conditions, start=1):
            mask &= c.test(X)
            acc = float(np.mean((base | mask) == P))
            if acc > best_acc:
                best_k, best_acc = k, acc
        return candidate.prefix(best_k)

    # -------------------------------------------------------- ruleset construction

    def cover(self, rules: list[Rule], remaining) -> list[Rule]:
        """Add rules until positives run out, a rule errs over half the time,
        or the description length exceeds the best seen by ``DL_SLACK`` bits."""
        best_dl = self.total_dl(rules)
        while self.is_pos[remaining].any():
            grow, prune = self.split(remaining)
            rule = self.prune_rule(self.grow_rule(grow), prune)
            if not rule.conditions:
                break
            cov = rule.covers(self.X[prune])
            p = float(np.sum(cov & self.is_pos[prune]))
            n = float(np.sum(cov & ~self.is_pos[prune]))
            if p + n == 0 or n / (p + n) > 0.5:
                break
            dl = self.total_dl(rules + [rule])
            if dl > best_dl + DL_SLACK:
                break
            rules = rules + [rule]
            best_dl = min(best_dl, dl)
            remaining = remaining[~rule.covers(self.X[remaining])]
        return rules

    def optimize(self, rules: list[Rule]) -> list[Rule]:
        rules = list(rules)
        all_idx = np.arange(len(self.X))
        for i in range(len(rules)):
            data = all_idx[~self.ruleset_cover(rules[:i], all_idx)]
            if not self.is_pos[data].any():
                continue
            grow, prune = self.split(data)
            replacement = self.prune_for_ruleset(rules, i, self.grow_rule(grow), prune)
            revision = self.prune_for_ruleset(rules, i, self.grow_rule(grow, start=rules[i]), prune)
            options = [rules[i]] + [r for r in (replacement, revision) if r.conditions]
            dls = [self.total_dl(rules[:i] + [r] + rules[i + 1:]) for r in options]
            rules[i] = options[int(np.argmin(dls))]
        uncovered = all_idx[~self.ruleset_cover(rules, all_idx)]
        return self.cover(rules, uncovered)

    def drop_useless(self, rules: list[Rule]) -> list[Rule]:
        rules = list(rules)
        for i in reversed(range(len(rules))):
            without = rules[:i] + rules[i + 1:]
            if self.total_dl(without) < self.total_dl(rules):
                rules = without
        return rules


@register
class RuleSet(Model):
    """Ordered rules, first match wins, unconditional default last."""

    kind = "ripper"

    def __init__(self, rules: Sequence[Rule], default: int, n_features: int,
                 feature_names: Sequence[str] | None = None,
                 distributions: Sequence[Sequence[float]] | None = None):
        self.rules = list(rules)
        self.default = int(default)
        self.n_features = n_features
        self.feature_names = list(feature_names) if feature_names is not None else None
        # per rule (then default) [nonhit, hit] training coverage counts
        if distributions is None:
            distributions = [[0.0, 1.0] if r.consequent == 1 else [1.0, 0.0] for r in self.rules]
            distributions.append([0.0, 1.0] if default == 1 else [1.0, 0.0])
        self.distributions = np.asarray(distributions, dtype=float)

    def firing_rule(self, X) -> np.ndarray:
        """Index of the first rule covering each row (``len(rules)`` is the default)."""
        X = as_2d(X)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        fired = np.full(len(X), len(self.rules))
        for i in reversed(range(len(self.rules))):
            fired[self.rules[i].covers(X)] = i
        return fired

    def classify(self, X) -> np.ndarray:
        consequents = np.array([r.consequent for r in self.rules] + [self.default])
        return consequents[self.firing_rule(X)]

    def classify_record(self, record: Mapping[str, float]) -> int:
        """Classify a mapping of feature name to value; unnamed features are not allowed."""
        if self.feature_names is None:
            raise ValueError("ruleset has no feature names")
        used = {self.feature_names[c.feature] for r in self.rules for c in r.conditions}
        missing = [n for n in used if n not in record]
        if missing:
            raise ValueError(f"record lacks features used by the rules: {sorted(set(missing))}")
        x = np.array([record.get(n, np.nan) for n in self.feature_names], dtype=float)
        return int(self.classify(x)[0])

    def predict(self, X) -> np.ndarray:
        return self.classify(X)

    def score(self, X) -> np.ndarray:
        d = self.distributions[self.firing_rule(X)]
        total = d.sum(axis=1)
        return np.where(total > 0, d[:, 1] / np.where(total > 0, total, 1.0), float(self.default))

    def describe(self) -> str:
        names = self.feature_names or [f"x{i}" for i in range(self.n_features)]
        label = {1: "Hit", 0: "NonHit"}
        lines = []
        for r in self.rules:
            conds = " and ".join(f"({names[c.feature]} {c.op} {c.value:.6f})" for c in r.conditions)
            lines.append(f"{conds} => {label[r.consequent]}")
        lines.append(f"=> {label[self.default]}")
        return "\n".join(lines)

    def params(self) -> dict:
        return {
            "n_features": self.n_features,
            "feature_names": self.feature_names,
            "default": self.default,
            "rules": [{"consequent": r.consequent,
                       "conditions": [[c.feature, c.op, c.value] for c in r.conditions]}
                      for r in self.rules],
            "distributions": self.distributions.tolist(),
        }

    @classmethod
    def from_params(cls, d):
        rules = [Rule(tuple(Condition(int(f), op, float(v)) for f, op, v in r["conditions"]),
                      int(r["consequent"])) for r in d["rules"]]
        return cls(rules, d["default"], d["n_features"], d.get("feature_names"), d["distributions"])


def ripper_fit(X, y, folds: int = 3, min_weight: int = 2, optimize_runs: int = 2,
               seed: int = 0, feature_names: Sequence[str] | None = None) -> RuleSet:
    """Learn an ordered ruleset for the minority class (ties go to NonHit)."""
    X = as_2d(X)
    y = np.asarray(y, dtype=int)
    counts = np.bincount(y, minlength=2)
    pos = 0 if counts[0] <= counts[1] else 1
    default = 1 - pos
    learner = _Learner(X, y, pos, folds, min_weight, np.random.default_rng(seed))
    rules = learner.cover([], np.arange(len(y)))
    for _ in range(optimize_runs):
        if not rules:
            break
        rules = learner.optimize(rules)
    rules = learner.drop_useless(rules)

    model = RuleSet(rules, default, X.shape[1], feature_names)
    fired = model.firing_rule(X)
    dist = np.zeros((len(rules) + 1, 2))
    np.add.at(dist, (fired, y), 1.0)
    model.distributions = dist
    return model
