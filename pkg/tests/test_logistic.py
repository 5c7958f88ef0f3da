import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dancehit.classifiers import LogisticModel, logistic_fit, logistic_score, model_from_dict, sigmoid
from dancehit.classifiers.logistic import gradient, hessian, objective


def test_sigmoid_values():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(800.0) == 1.0 and sigmoid(-800.0) == 0.0
    assert sigmoid(2.0) == pytest.approx(1 / (1 + np.exp(-2.0)), abs=1e-15)
    s = np.linspace(-30, 30, 61)
    np.testing.assert_allclose(sigmoid(s) + sigmoid(-s), 1.0, atol=1e-15)


def test_zero_model_scores_half():
    m = LogisticModel(0.0, np.zeros(3))
    np.testing.assert_array_equal(logistic_score(m, np.random.default_rng(0).normal(size=(5, 3))), 0.5)
    assert m.predict(np.zeros((1, 3)))[0] == 1  # cutoff is inclusive at 0.5


def _central(f, w, h=1e-6):
    g = np.zeros_like(w)
    for i in range(len(w)):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (f(w + e) - f(w - e)) / (2 * h)
    return g


@pytest.mark.parametrize("seed", range(50))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n, p = int(rng.integers(3, 15)), int(rng.integers(1, 5))
    X, y = rng.normal(size=(n, p)), rng.integers(0, 2, n).astype(float)
    w, lam = rng.normal(size=p + 1), float(rng.uniform(0, 2))
    g = gradient(w, X, y, lam)
    fd = _central(lambda v: objective(v, X, y, lam), w)
    assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.max(np.abs(fd)))
    H = hessian(w, X, y, lam)
    Hfd = np.column_stack([_central(lambda v: gradient(v, X, y, lam)[i], w) for i in range(p + 1)])
    np.testing.assert_allclose(H, Hfd, atol=1e-5)


def test_bias_is_not_penalised():
    X, y = np.zeros((4, 1)), np.array([1.0, 1, 1, 0])
    w = np.array([0.3, 2.0])
    assert gradient(w, X, y, 1.0)[1] == pytest.approx(2.0)
    m = logistic_fit(X, y, lam=10.0)
    assert m.score(np.zeros((1, 1)))[0] == pytest.approx(0.75, abs=1e-8)


def test_separable_data_with_penalty():
    X = np.array([[-3.0], [-2.0], [-1.0], [-0.5], [0.5], [1.0], [2.0], [3.0]])
    y = (X[:, 0] > 0).astype(int)
    m = logistic_fit(X, y, lam=0.1)
    assert m.converged and np.all(np.isfinite(m.coef))
    np.testing.assert_array_equal(m.predict(X), y)


def test_matches_closed_form_intercept_only():
    # with no informative feature the optimum is the log-odds of the base rate
    y = np.array([1, 1, 1, 0, 0])
    m = logistic_fit(np.zeros((5, 2)), y)
    assert m.bias == pytest.approx(np.log(3 / 2), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-4, 5.0))
def test_optimum_properties(seed, lam):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 3))
    y = (X @ rng.normal(size=3) + rng.normal(size=40) > 0).astype(int)
    m = logistic_fit(X, y, lam=lam, tol=1e-8)
    w = np.r_[m.bias, m.coef]
    assert m.converged
    assert np.max(np.abs(gradient(w, X, y, lam))) < 1e-8
    assert objective(w, X, y, lam) <= objective(np.zeros(4), X, y, lam)


def test_non_convergence_is_flagged():
    X = np.array([[-1.0], [1.0]])
    m = logistic_fit(X, np.array([0, 1]), lam=0.0, max_iter=2)
    assert not m.converged and np.all(np.isfinite(m.coef))


def test_round_trip():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 2))
    m = logistic_fit(X, (X[:, 0] > 0).astype(int), lam=1.0)
    back = model_from_dict(m.to_dict())
    np.testing.assert_array_equal(back.score(X), m.score(X))
    with pytest.raises(ValueError):
        m.score(np.zeros((1, 3)))


def test_converges_when_the_last_decrease_is_below_rounding():
    rng = np.random.default_rng(529)
    X = rng.normal(size=(40, 3))
    y = (X @ rng.normal(size=3) + rng.normal(size=40) > 0).astype(int)
    m = logistic_fit(X, y, lam=0.778319983765854, tol=1e-8)
    assert m.converged
