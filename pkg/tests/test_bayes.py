import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from dancehit.classifiers import GaussianNB, model_from_dict, nb_fit, nb_score


def symmetric_model():
    X = np.array([[-1.0], [1.0], [1.0], [3.0]])
    y = np.array([1, 1, 0, 0])
    return nb_fit(X, y)


def test_fitted_parameters():
    m = symmetric_model()
    np.testing.assert_allclose(m.priors, [0.5, 0.5])
    np.testing.assert_allclose(m.means[:, 0], [2.0, 0.0])
    np.testing.assert_allclose(m.variances[:, 0], [1.0, 1.0])


def test_midpoint_is_even():
    assert nb_score(symmetric_model(), [[1.0]])[0] == pytest.approx(0.5, abs=1e-12)


def test_log_likelihood_ratio_of_two():
    got = nb_score(symmetric_model(), [[0.0]])[0]
    assert got == pytest.approx(1 / (1 + math.exp(-2)), abs=1e-12)
    assert got == pytest.approx(0.8808, abs=1e-4)


def test_priors_dominate_identical_likelihoods():
    m = GaussianNB([0.1, 0.9], [[0.0, 1.0], [0.0, 1.0]], [[1.0, 2.0], [1.0, 2.0]])
    xs = np.random.default_rng(0).normal(size=(20, 2)) * 5
    np.testing.assert_allclose(m.score(xs), 0.9, atol=1e-12)


def test_matches_scipy_oracle():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 2, 60)
    m = nb_fit(X, y)
    x = rng.normal(size=3)
    joint = [m.priors[c] * np.prod(sps.norm.pdf(x, m.means[c], np.sqrt(m.variances[c]))) for c in (0, 1)]
    assert m.score(x)[0] == pytest.approx(joint[1] / sum(joint), rel=1e-10)


def test_variance_floor_and_missing_class():
    m = nb_fit(np.array([[1.0, 0.0], [1.0, 1.0], [2.0, 5.0], [3.0, 6.0]]), np.array([1, 1, 0, 0]))
    assert m.variances[1, 0] == 1e-9
    assert np.all(np.isfinite(m.score(np.array([[1.5, 3.0]]))))
    with pytest.raises(ValueError):
        nb_fit(np.zeros((3, 1)), np.ones(3, int))


def test_far_points_do_not_overflow():
    m = symmetric_model()
    s = m.score(np.array([[-1e6], [1e6]]))
    assert s.tolist() == [1.0, 0.0]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_posteriors_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 4)) * rng.uniform(0.1, 5, 4)
    y = np.r_[np.ones(15, int), np.zeros(15, int)]
    post = nb_fit(X, y).posterior(rng.normal(size=(10, 4)) * 3)
    np.testing.assert_allclose(post.sum(axis=1), 1.0, atol=1e-12)
    assert np.all((post >= 0) & (post <= 1))


def test_round_trip():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 2, 40)
    m = nb_fit(X, y)
    back = model_from_dict(m.to_dict())
    np.testing.assert_array_equal(back.score(X), m.score(X))
    with pytest.raises(ValueError):
        m.score(np.zeros((1, 2)))
