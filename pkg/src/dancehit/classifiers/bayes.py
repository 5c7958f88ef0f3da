from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .base import Model, as_2d, register

VAR_FLOOR = 1e-9


@register
class GaussianNB(Model):
    """Gaussian naive Bayes with per-class, per-feature mean and variance."""

    kind = "naive_bayes"

    def __init__(self, priors, means, variances):
        self.priors = np.asarray(priors, dtype=float)        # [P(NonHit), P(Hit)]
        self.means = np.asarray(means, dtype=float)          # (2, n_features)
        self.variances = np.asarray(variances, dtype=float)  # (2, n_features)

    def joint_log_likelihood(self, X) -> np.ndarray:
        """log P(y) + sum_j log N(x_j; mean_yj, var_yj), shape (n, 2)."""
        X = as_2d(X)
        if X.shape[1] != self.means.shape[1]:
            raise ValueError(f"expected {self.means.shape[1]} features, got {X.shape[1]}")
        out = np.empty((len(X), 2))
        for c in range(2):
            var = self.variances[c]
            ll = -0.5 * (np.log(2 * np.pi * var) + (X - self.means[c]) ** 2 / var)
            out[:, c] = np.log(self.priors[c]) + ll.sum(axis=1)
        return out

    def posterior(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def score(self, X) -> np.ndarray:
        return self.posterior(X)[:, 1]

    def params(self):
        return {"priors": self.priors.tolist(), "means": self.means.tolist(),
                "variances": self.variances.tolist()}

    @classmethod
    def from_params(cls, d):
        return cls(d["priors"], d["means"], d["variances"])


def nb_fit(X, y, var_floor: float = VAR_FLOOR) -> GaussianNB:
    X = as_2d(X)
    y = np.asarray(y, dtype=int)
    counts = np.bincount(y, minlength=2)
    if counts.min() == 0:
        raise ValueError("both classes must be present")
    means = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
    variances = np.stack([X[y == c].var(axis=0) for c in (0, 1)])
    return GaussianNB(counts / counts.sum(), means, np.maximum(variances, var_floor))


def nb_score(model: GaussianNB, x) -> np.ndarray:
    """P(Hit | x)."""
    return model.score(x)
