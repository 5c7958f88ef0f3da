"""L2-regularised logistic regression fitted by damped Newton steps."""

from __future__ import annotations

import logging

import numpy as np

from .base import Model, as_2d, register

logger = logging.getLogger(__name__)


def sigmoid(s):
    """``1 / (1 + exp(-s))``, evaluated without overflow."""
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out if out.ndim else float(out)


def _design(X):
    X = as_2d(X)
    return np.hstack([np.ones((len(X), 1)), X])


def objective(w, X, y, lam: float) -> float:
    """Negative log-likelihood plus ``lam/2 * |a|^2``; ``w[0]`` is the unpenalised bias."""
    s = _design(X) @ w
    nll = np.sum(np.logaddexp(0.0, s) - y * s)
    return float(nll + 0.5 * lam * np.dot(w[1:], w[1:]))


def gradient(w, X, y, lam: float) -> np.ndarray:
    A = _design(X)
    g = A.T @ (sigmoid(A @ w) - y)
    g[1:] += lam * w[1:]
    return g


def hessian(w, X, y, lam: float) -> np.ndarray:
    A = _design(X)
    p = sigmoid(A @ w)
    H = (A * (p * (1 - p))[:, None]).T @ A
    H[np.diag_indices_from(H)] += np.r_[0.0, np.full(len(w) - 1, lam)]
    return H


@register
class LogisticModel(Model):
    kind = "logistic"

    def __init__(self, bias: float, coef, lam: float = 0.0, converged: bool = True):
        self.bias = float(bias)
        self.coef = np.asarray(coef, dtype=float)
        self.lam = lam
        self.converged = converged

    def linear_score(self, X) -> np.ndarray:
        X = as_2d(X)
        if X.shape[1] != len(self.coef):
            raise ValueError(f"expected {len(self.coef)} features, got {X.shape[1]}")
        return self.bias + X @ self.coef

    def score(self, X) -> np.ndarray:
        return sigmoid(self.linear_score(X))

    def params(self):
        return {"bias": self.bias, "coef": self.coef.tolist(), "lam": self.lam, "converged": self.converged}

    @classmethod
    def from_params(cls, d):
        return cls(d["bias"], d["coef"], d.get("lam", 0.0), d.get("converged", True))


def logistic_fit(X, y, lam: float = 1e-4, tol: float = 1e-8, max_iter: int = 100) -> LogisticModel:
    """Minimise the penalised negative log-likelihood.

    Converged when the gradient max-norm drops below ``tol``; otherwise the
    best iterate is returned with ``converged=False``.
    """
    X = as_2d(X)
    y = np.asarray(y, dtype=float)
    w = np.zeros(X.shape[1] + 1)
    f = objective(w, X, y, lam)
    converged = False
    for _ in range(max_iter):
        g = gradient(w, X, y, lam)
        if np.max(np.abs(g)) < tol:
            converged = True
            break
        H = hessian(w, X, y, lam)
        try:
            step = np.linalg.solve(H + 1e-12 * np.eye(len(w)), g)
        except np.linalg.LinAlgError:
            step = g
        if np.dot(step, g) <= 0:
            step = g
        t, slope = 1.0, float(np.dot(g, step))
        noise = 8 * np.finfo(float).eps * max(1.0, abs(f))
        while True:
            w_new = w - t * step
            f_new = objective(w_new, X, y, lam)
            if f_new <= f - 1e-4 * t * slope:
                break
            # near the optimum the decrease falls below rounding; accept the
            # full step if it is flat in f and shrinks the gradient
            if t == 1.0 and f_new <= f + noise and \
                    np.max(np.abs(gradient(w_new, X, y, lam))) < np.max(np.abs(g)):
                break
            t *= 0.5
            if t < 1e-10:
                break
        if t < 1e-10:
            break
        w, f = w_new, f_new
    else:
        converged = np.max(np.abs(gradient(w, X, y, lam))) < tol
    if not converged:
        logger.warning("logistic fit did not reach gradient tolerance %g", tol)
    return LogisticModel(w[0], w[1:], lam, bool(converged))


def logistic_score(model: LogisticModel, x) -> np.ndarray:
    return model.score(x)
