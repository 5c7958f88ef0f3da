"""C4.5-style decision tree: gain-ratio binary splits on numeric features,
training-error collapsing and pessimistic-error pruning with subtree raising."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .base import Model, as_2d, register


@dataclass
class TreeNode:
    counts: np.ndarray  # [n_nonhit, n_hit] of training instances reaching the node
    feature: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None  # x[feature] <= threshold
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def n(self) -> float:
        return float(self.counts.sum())

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def n_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.n_leaves() + self.right.n_leaves()

    def to_dict(self) -> dict:
        d = {"counts": self.counts.tolist()}
        if not self.is_leaf:
            d.update(feature=self.feature, threshold=self.threshold,
                     left=self.left.to_dict(), right=self.right.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        node = cls(np.asarray(d["counts"], dtype=float))
        if "feature" in d:
            node.feature = int(d["feature"])
            node.threshold = float(d["threshold"])
            node.left = cls.from_dict(d["left"])
            node.right = cls.from_dict(d["right"])
        return node


def _entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits along the last axis of a count array."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def add_errs(n: float, e: float, cf: float) -> float:
    """Extra errors implied by the upper ``cf`` confidence limit of a binomial rate."""
    if n <= 0:
        return 0.0
    if cf > 0.5:
        raise ValueError("confidence factor must not exceed 0.5")
    if e < 1:
        base = n * (1.0 - cf ** (1.0 / n))
        if e == 0:
            return base
        return base + e * (add_errs(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = norm.ppf(1.0 - cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n)
    return r * n - e


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Return (feature, threshold) with the best gain ratio, or None."""
    n = len(y)
    parent = np.bincount(y, minlength=2).astype(float)
    h_parent = float(_entropy(parent))
    min_split = min(max(0.1 * n / 2.0, min_leaf), 25.0)
    cands = []
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs, ys = X[order, f], y[order]
        hits_left = np.cumsum(ys)[:-1].astype(float)
        n_left = np.arange(1, n, dtype=float)
        valid = (xs[1:] > xs[:-1]) & (n_left >= min_split) & (n - n_left >= min_split)
        if not valid.any():
            continue
        pos = np.flatnonzero(valid)
        nl = n_left[pos]
        left = np.stack([nl - hits_left[pos], hits_left[pos]], axis=1)
        right = parent - left
        cond = (nl * _entropy(left) + (n - nl) * _entropy(right)) / n
        gains = h_parent - cond
        best = int(np.argmax(gains))
        i = pos[best]
        gain = gains[best] - math.log2(len(pos)) / n
        if gain <= 0:
            continue
        frac = nl[best] / n
        split_info = -(frac * math.log2(frac) + (1 - frac) * math.log2(1 - frac))
        cands.append((f, 0.5 * (xs[i] + xs[i + 1]), gain, gain / split_info))
    if not cands:
        return None
    mean_gain = sum(c[2] for c in cands) / len(cands)
    eligible = [c for c in cands if c[2] >= mean_gain - 1e-10]
    f, thr, _, _ = max(eligible, key=lambda c: c[3])
    return f, float(thr)


def _counts(y: np.ndarray) -> np.ndarray:
    return np.bincount(y, minlength=2).astype(float)


class _Builder:
    def __init__(self, X, y, min_leaf, cf, max_depth):
        self.X, self.y = X, y
        self.min_leaf, self.cf, self.max_depth = min_leaf, cf, max_depth

    def grow(self, idx, depth) -> TreeNode:
        node = TreeNode(_counts(self.y[idx]))
        if (node.counts.min() == 0 or len(idx) < 2 * self.min_leaf
                or (self.max_depth is not None and depth >= self.max_depth)):
            return node
        split = _best_split(self.X[idx], self.y[idx], self.min_leaf)
        if split is None:
            return node
        node.feature, node.threshold = split
        go_left = self.X[idx, node.feature] <= node.threshold
        node.left = self.grow(idx[go_left], depth + 1)
        node.right = self.grow(idx[~go_left], depth + 1)
        return node

    # training errors if the node were a leaf vs. of its subtree
    def collapse(self, node: TreeNode) -> TreeNode:
        if node.is_leaf:
            return node
        if _train_errors(node) >= node.n - node.counts.max() - 1e-3:
            return TreeNode(node.counts)
        node.left = self.collapse(node.left)
        node.right = self.collapse(node.right)
        return node

    def leaf_errors(self, counts) -> float:
        n = float(counts.sum())
        e = n - float(counts.max()) if n > 0 else 0.0
        return e + add_errs(n, e, self.cf)

    def tree_errors(self, node) -> float:
        if node.is_leaf:
            return self.leaf_errors(node.counts)
        return self.tree_errors(node.left) + self.tree_errors(node.right)

    def branch_errors(self, node, idx) -> float:
        """Estimated errors of ``node`` if the instances ``idx`` were routed through it."""
        if node.is_leaf:
            return self.leaf_errors(_counts(self.y[idx]))
        go_left = self.X[idx, node.feature] <= node.threshold
        return self.branch_errors(node.left, idx[go_left]) + self.branch_errors(node.right, idx[~go_left])

    def refit(self, node, idx) -> TreeNode:
        new = TreeNode(_counts(self.y[idx]), node.feature, node.threshold)
        if not node.is_leaf:
            go_left = self.X[idx, node.feature] <= node.threshold
            new.left = self.refit(node.left, idx[go_left])
            new.right = self.refit(node.right, idx[~go_left])
        return new

    def prune(self, node, idx) -> TreeNode:
        if node.is_leaf:
            return node
        go_left = self.X[idx, node.feature] <= node.threshold
        li, ri = idx[go_left], idx[~go_left]
        node.left = self.prune(node.left, li)
        node.right = self.prune(node.right, ri)
        largest = node.left if len(li) >= len(ri) else node.right
        err_largest = self.branch_errors(largest, idx)
        err_leaf = self.leaf_errors(node.counts)
        err_tree = self.tree_errors(node)
        if err_leaf <= err_tree + 0.1 and err_leaf <= err_largest + 0.1:
            return TreeNode(node.counts)
        if err_largest <= err_tree + 0.1:
            return self.prune(self.refit(largest, idx), idx)
        return node


def _train_errors(node: TreeNode) -> float:
    if node.is_leaf:
        return node.n - float(node.counts.max())
    return _train_errors(node.left) + _train_errors(node.right)


@register
class DecisionTree(Model):
    kind = "c45"

    def __init__(self, root: TreeNode, n_features: int, max_depth: int | None = None):
        self.root = root
        self.n_features = n_features
        self.max_depth = max_depth

    def depth(self) -> int:
        return self.root.depth()

    def score(self, X) -> np.ndarray:
        X = as_2d(X)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        out = np.empty(len(X))
        self._route(self.root, X, np.arange(len(X)), out, self.root.counts)
        return out

    def _route(self, node, X, idx, out, fallback):
        counts = node.counts if node.n > 0 else fallback
        if node.is_leaf:
            total = counts.sum()
            out[idx] = counts[1] / total if total > 0 else 0.5
            return
        go_left = X[idx, node.feature] <= node.threshold
        self._route(node.left, X, idx[go_left], out, counts)
        self._route(node.right, X, idx[~go_left], out, counts)

    def params(self) -> dict:
        return {"n_features": self.n_features, "max_depth": self.max_depth, "root": self.root.to_dict()}

    @classmethod
    def from_params(cls, d):
        return cls(TreeNode.from_dict(d["root"]), int(d["n_features"]), d.get("max_depth"))

    def describe(self, feature_names=None) -> str:
        lines = []

        def walk(node, indent):
            if node.is_leaf:
                cls_name = "Hit" if node.counts[1] >= node.counts[0] else "NonHit"
                lines.append(f"{indent}=> {cls_name} ({node.counts[1]:g}/{node.n:g})")
                return
            name = feature_names[node.feature] if feature_names else f"x{node.feature}"
            lines.append(f"{indent}{name} <= {node.threshold:.6g}")
            walk(node.left, indent + "|   ")
            lines.append(f"{indent}{name} > {node.threshold:.6g}")
            walk(node.right, indent + "|   ")

        walk(self.root, "")
        return "\n".join(lines)


def c45_fit(X, y, min_leaf: int = 2, prune_confidence: float = 0.25,
            max_depth: int | None = None, prune: bool = True) -> DecisionTree:
    """Grow a C4.5 tree on numeric features and prune it pessimistically.

    ``max_depth`` caps the number of tests on any root-to-leaf path.
    """
    X = as_2d(X)
    y = np.asarray(y, dtype=int)
    b = _Builder(X, y, min_leaf, prune_confidence, max_depth)
    idx = np.arange(len(y))
    root = b.grow(idx, 0)
    if prune:
        root = b.collapse(root)
        root = b.prune(root, idx)
    return DecisionTree(root, X.shape[1], max_depth)
