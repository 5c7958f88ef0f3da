"""Soft-margin SVM trained by sequential minimal optimisation, plus grid search."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numba
import numpy as np

from .base import Model, as_2d, register

logger = logging.getLogger(__name__)

C_GRID = tuple(range(1, 22, 2))
GAMMA_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0)  # 1/sigma^2
DEGREE_GRID = (1, 2)


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    d: int = 1
    c: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("polynomial", "rbf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.d < 1 or self.c <= 0 or self.sigma <= 0:
            raise ValueError("kernel needs d >= 1, c > 0, sigma > 0")

    @classmethod
    def rbf(cls, gamma: float) -> "KernelSpec":
        return cls("rbf", sigma=float(1.0 / np.sqrt(gamma)))

    @classmethod
    def polynomial(cls, d: int, c: float = 1.0) -> "KernelSpec":
        return cls("polynomial", d=int(d), c=float(c))

    @property
    def gamma(self) -> float:
        return 1.0 / self.sigma ** 2

    def to_dict(self):
        return {"kind": self.kind, "d": self.d, "c": self.c, "sigma": self.sigma}


def _sq_dists(A, B) -> np.ndarray:
    D = np.sum(A ** 2, axis=1)[:, None] + np.sum(B ** 2, axis=1)[None, :] - 2.0 * A @ B.T
    return np.maximum(D, 0.0)


def gram(spec: KernelSpec, A, B) -> np.ndarray:
    A, B = as_2d(A), as_2d(B)
    if spec.kind == "polynomial":
        return (1.0 + A @ B.T / spec.c) ** spec.d
    return np.exp(-_sq_dists(A, B) / spec.sigma ** 2)


def kernel_eval(spec: KernelSpec, x, z) -> float:
    x = np.asarray(x, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if x.shape != z.shape:
        raise ValueError("kernel arguments must have equal dimensionality")
    if spec.kind == "polynomial":
        return float((1.0 + np.dot(x, z) / spec.c) ** spec.d)
    diff = x - z
    return float(np.exp(-np.dot(diff, diff) / spec.sigma ** 2))


def dual_objective(alpha, y, K) -> float:
    """``sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`` (to be maximised)."""
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


@numba.njit(cache=True)
def _smo_loop(Q, y, C, tol, max_iter):
    n = len(y)
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    converged = False
    while it < max_iter:
        # maximal violating pair over I_up x I_low, ranked by -y*G
        i = -1
        gmax = -np.inf
        j = -1
        gmin = np.inf
        for t in range(n):
            v = -y[t] * G[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > gmax:
                    gmax = v
                    i = t
            if (y[t] < 0 and alpha[t] < C) or (y[t] > 0 and alpha[t] > 0):
                if v < gmin:
                    gmin = v
                    j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            converged = True
            break
        it += 1
        ai = alpha[i]
        aj = alpha[j]
        if y[i] != y[j]:
            quad = max(Q[i, i] + Q[j, j] + 2.0 * Q[i, j], 1e-12)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni = ai + delta
            nj = aj + delta
            if diff > 0:
                if nj < 0:
                    nj = 0.0
                    ni = diff
            elif ni < 0:
                ni = 0.0
                nj = -diff
            if diff > 0:
                if ni > C:
                    ni = C
                    nj = C - diff
            elif nj > C:
                nj = C
                ni = C + diff
        else:
            quad = max(Q[i, i] + Q[j, j] - 2.0 * Q[i, j], 1e-12)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni = ai - delta
            nj = aj + delta
            if total > C:
                if ni > C:
                    ni = C
                    nj = total - C
            elif nj < 0:
                nj = 0.0
                ni = total
            if total > C:
                if nj > C:
                    nj = C
                    ni = total - C
            elif ni < 0:
                ni = 0.0
                nj = total
        alpha[i] = ni
        alpha[j] = nj
        di = ni - ai
        dj = nj - aj
        Qi = Q[i]
        Qj = Q[j]
        for t in range(n):
            G[t] += Qi[t] * di + Qj[t] * dj
    return alpha, G, it, converged


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
              max_iter: int | None = None) -> tuple[np.ndarray, float, bool]:
    """Solve the SVM dual on a precomputed Gram matrix.

    Works on ``min 1/2 a'Qa - e'a`` with ``Q_ij = y_i y_j K_ij``, updating
    the maximal-violating pair analytically each step until the violation
    is below ``tol`` or ``max_iter`` pair updates have been made (default
    ``max(100000, 200 n)``; badly conditioned problems with large C can need
    far more). Returns (alpha, bias, converged).
    """
    y = np.ascontiguousarray(y, dtype=float)
    n = len(y)
    Q = np.ascontiguousarray((y[:, None] * y[None, :]) * K)
    max_iter = max_iter if max_iter is not None else max(100_000, 200 * n)
    alpha, G, n_iter, converged = _smo_loop(Q, y, float(C), float(tol), int(max_iter))
    if not converged:
        logger.info("SMO stopped after %d iterations without meeting tol=%g", n_iter, tol)

    yG = -y * G
    pos, neg = y > 0, y < 0
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b = float(np.mean(yG[free]))
    else:
        up = (pos & (alpha < C)) | (neg & (alpha > 0))
        low = (neg & (alpha < C)) | (pos & (alpha > 0))
        hi = yG[up].max() if up.any() else yG[low].min()
        lo = yG[low].min() if low.any() else hi
        b = 0.5 * (hi + lo)
    return alpha, b, converged


@register
class SvmModel(Model):
    """Support vectors, their labels and multipliers, bias and kernel."""

    kind = "svm"
    threshold = 0.0

    def __init__(self, support_vectors, labels, alphas, bias: float, kernel: KernelSpec,
                 C: float, tol: float = 1e-3, n_features: int | None = None):
        self.support_vectors = as_2d(support_vectors) if len(support_vectors) else np.zeros((0, n_features or 0))
        self.labels = np.asarray(labels, dtype=float)
        self.alphas = np.asarray(alphas, dtype=float)
        self.bias = float(bias)
        self.kernel = kernel
        self.C = float(C)
        self.tol = tol
        self.n_features = n_features if n_features is not None else self.support_vectors.shape[1]

    def score(self, X) -> np.ndarray:
        """Signed margin ``sum_i alpha_i y_i K(x_i, x) + b``."""
        X = as_2d(X)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        if len(self.alphas) == 0:
            return np.full(len(X), self.bias)
        return gram(self.kernel, X, self.support_vectors) @ (self.alphas * self.labels) + self.bias

    def predict(self, X) -> np.ndarray:
        return (self.score(X) >= 0).astype(int)

    def params(self):
        return {"support_vectors": self.support_vectors.tolist(), "labels": self.labels.tolist(),
                "alphas": self.alphas.tolist(), "bias": self.bias, "kernel": self.kernel.to_dict(),
                "C": self.C, "tol": self.tol, "n_features": self.n_features}

    @classmethod
    def from_params(cls, d):
        return cls(np.asarray(d["support_vectors"], dtype=float), d["labels"], d["alphas"], d["bias"],
                   KernelSpec(**d["kernel"]), d["C"], d.get("tol", 1e-3), d["n_features"])


def _signed(y) -> np.ndarray:
    y = np.asarray(y)
    if set(np.unique(y)) <= {-1, 1} and (y == -1).any():
        return y.astype(float)
    return np.where(y > 0, 1.0, -1.0)


def smo_fit(X, y, kernel: KernelSpec, C: float = 1.0, tol: float = 1e-3,
            K: np.ndarray | None = None, max_iter: int | None = None) -> SvmModel:
    """Train on labels in {0, 1} or {-1, +1}; only multipliers above zero are kept."""
    if C <= 0:
        raise ValueError("C must be positive")
    X = as_2d(X)
    ys = _signed(y)
    if K is None:
        K = gram(kernel, X, X)
    alpha, b, _ = smo_solve(K, ys, C, tol, max_iter)
    sv = alpha > 0
    return SvmModel(X[sv], ys[sv], alpha[sv], b, kernel, C, tol, X.shape[1])


def svm_score(model: SvmModel, x) -> np.ndarray:
    return model.score(x)


# ---------------------------------------------------------------- grid search

def _mean_cv_auc(Kfull, y01, folds, C, tol) -> float:
    from ..evaluation import auc_score

    ys = np.where(y01 > 0, 1.0, -1.0)
    aucs = []
    for test in folds:
        train = np.setdiff1d(np.arange(len(y01)), test)
        alpha, b, _ = smo_solve(Kfull[np.ix_(train, train)], ys[train], C, tol)
        margin = Kfull[np.ix_(test, train)] @ (alpha * ys[train]) + b
        aucs.append(auc_score(y01[test], margin))
    return float(np.mean(aucs))


def grid_search_svm(X, y, kind: str, seed: int = 0, C_grid=C_GRID, param_grid=None,
                    neighborhood: int = 8, initial_folds: int = 2, refine_folds: int = 10,
                    tol: float = 1e-3) -> tuple[KernelSpec, float]:
    """Pick kernel parameter and C by cross-validated AUC.

    Every grid point is scored by ``initial_folds``-fold CV. From the best
    one, the point and its grid neighbours are re-scored by
    ``refine_folds``-fold CV and the search moves to a better neighbour
    until none improves or the grid border stops it.
    """
    from ..datamodel import stratified_folds

    X = as_2d(X)
    y01 = (np.asarray(y) > 0).astype(int)
    if kind == "rbf":
        param_grid = GAMMA_GRID if param_grid is None else param_grid
        make = KernelSpec.rbf
    elif kind == "polynomial":
        param_grid = DEGREE_GRID if param_grid is None else param_grid
        make = KernelSpec.polynomial
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    C_grid, param_grid = tuple(C_grid), tuple(param_grid)

    min_class = int(np.bincount(y01, minlength=2).min())
    if min_class < 2:
        return make(param_grid[len(param_grid) // 2]), float(C_grid[0])

    grams = {}

    def K_for(pi):
        if pi not in grams:
            grams[pi] = gram(make(param_grid[pi]), X, X)
        return grams[pi]

    def score_all(points, k, cache):
        folds = stratified_folds(y01, min(k, min_class), seed)
        for p in points:
            if p not in cache:
                cache[p] = _mean_cv_auc(K_for(p[0]), y01, folds, C_grid[p[1]], tol)
        return cache

    points = list(itertools.product(range(len(param_grid)), range(len(C_grid))))
    coarse = score_all(points, initial_folds, {})
    current = max(points, key=lambda p: coarse[p])

    if neighborhood == 8:
        steps = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)]
    else:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    fine: dict = {}
    while True:
        nbrs = [(current[0] + a, current[1] + b) for a, b in steps]
        nbrs = [p for p in nbrs if 0 <= p[0] < len(param_grid) and 0 <= p[1] < len(C_grid)]
        score_all([current] + nbrs, refine_folds, fine)
        best = max([current] + nbrs, key=lambda p: fine[p])
        if fine[best] <= fine[current]:
            break
        current = best
    return make(param_grid[current[0]]), float(C_grid[current[1]])
