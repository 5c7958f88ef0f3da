import numpy as np
import pytest

from dancehit import preprocess
from dancehit.evaluation import CrossValidator, compare_models
from dancehit.pipeline import DEFAULT_SPECS, FittedPipeline, ModelSpec, fit_pipeline, get_specs
from dancehit.preprocess import GaConfig

from fixtures import layout_dataset, synthetic_dataset

SMALL_GA = GaConfig(seed=0, population_size=6, generations=3)


@pytest.fixture
def spy(monkeypatch):
    """Record the raw rows given to standardize_fit and the matrices given to genetic_select."""
    calls = {"standardize": [], "select": []}
    real_fit, real_select = preprocess.standardize_fit, preprocess.genetic_select

    def fit(X):
        calls["standardize"].append(np.array(X, copy=True))
        return real_fit(X)

    def select(X, y, config):
        calls["select"].append((np.array(X, copy=True), calls["standardize"][-1]))
        return real_select(X, y, config)

    monkeypatch.setattr(preprocess, "standardize_fit", fit)
    monkeypatch.setattr(preprocess, "genetic_select", select)
    return calls


def _row_ids(ds, rows):
    lookup = {r.tobytes(): i for i, r in enumerate(ds.X)}
    return {lookup[r.tobytes()] for r in rows}


def test_no_test_fold_reaches_preprocessing(spy):
    ds = layout_dataset(30, 20, 5, 5, n_features=6)
    cv = CrossValidator(ds, runs=2, folds=5, seed=0, with_feature_selection=True, ga=SMALL_GA)
    cv.evaluate(DEFAULT_SPECS["nb"])
    assert len(spy["standardize"]) == len(spy["select"]) == 10
    seen = [_row_ids(ds, rows) for rows in spy["standardize"]]
    expected = []
    for r in range(2):
        for f in range(5):
            train, test = cv.split(r, f)
            expected.append(set(train.tolist()))
            assert not expected[-1] & set(test.tolist())
    assert seen == expected
    for Xga, raw in spy["select"]:
        st_ = preprocess.Standardizer.from_dict(preprocess.standardize_fit(raw).to_dict())
        np.testing.assert_array_equal(Xga, preprocess.standardize_apply(st_, raw))


def test_preprocessing_is_reused_across_models(spy):
    ds = layout_dataset(30, 20, 5, 5, n_features=4)
    compare_models(ds, get_specs(["nb", "logistic", "c45"]), runs=1, folds=5, seed=0,
                   with_feature_selection=True, ga=SMALL_GA)
    assert len(spy["select"]) == 5


def test_global_scope_sees_everything(spy):
    ds = layout_dataset(30, 20, 5, 5, n_features=4)
    CrossValidator(ds, runs=1, folds=5, seed=0, with_feature_selection=True, ga=SMALL_GA,
                   selection_scope="global")
    assert _row_ids(ds, spy["standardize"][0]) == set(range(len(ds)))
    with pytest.raises(ValueError):
        CrossValidator(ds, 1, 5, 0, selection_scope="nowhere")


def test_partition_hash_shared_across_specs():
    ds = layout_dataset(30, 20, 5, 5)
    comp = compare_models(ds, get_specs(["nb", "logistic"]), runs=2, folds=5, seed=3)
    hashes = {r.partition_hash for r in comp.results.values()}
    assert len(hashes) == 1
    assert hashes == {CrossValidator(ds, 2, 5, 3).partition_hash}


@pytest.mark.parametrize("key", list(DEFAULT_SPECS))
def test_fitted_pipeline_round_trip(key, tmp_path):
    ds = synthetic_dataset(seed=1, n_songs=120)
    spec = DEFAULT_SPECS[key]
    if spec.kind.startswith("svm"):
        spec = ModelSpec(spec.name, spec.kind, (("C_grid", (1, 3)), ("param_grid", (1e-3, 1e-2)
                                                                                  if key == "svm-rbf" else (1, 2))))
    pipe = fit_pipeline(ds, spec, seed=0, ga=SMALL_GA)
    pipe.save(tmp_path / "m.json")
    back = FittedPipeline.load(tmp_path / "m.json")
    assert back.feature_names == ds.feature_names and back.name == spec.name
    np.testing.assert_array_equal(back.selected, pipe.selected)
    np.testing.assert_array_equal(back.score(ds.X), pipe.score(ds.X))
    np.testing.assert_array_equal(back.predict(ds.X), pipe.predict(ds.X))


def test_fit_pipeline_is_deterministic():
    ds = synthetic_dataset(seed=2, n_songs=100)
    a = fit_pipeline(ds, DEFAULT_SPECS["ripper"], seed=4, ga=SMALL_GA)
    b = fit_pipeline(ds, DEFAULT_SPECS["ripper"], seed=4, ga=SMALL_GA)
    np.testing.assert_array_equal(a.selected, b.selected)
    np.testing.assert_array_equal(a.predict(ds.X), b.predict(ds.X))


def test_untuned_svm_options_and_unknown_kind():
    ds = layout_dataset(20, 20, 0, 0, n_features=2)
    spec = ModelSpec("svm", "svm_rbf", (("tune", False), ("gamma", 0.5), ("C", 2.0)))
    pipe = fit_pipeline(ds, spec, seed=0, with_fs=False)
    assert pipe.model.kernel.gamma == pytest.approx(0.5) and pipe.model.C == 2.0
    with pytest.raises(ValueError):
        fit_pipeline(ds, ModelSpec("x", "forest"), seed=0, with_fs=False)
    with pytest.raises(ValueError):
        get_specs(["nb", "forest"])
