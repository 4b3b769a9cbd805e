import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from ocaselect import (
    BcaSelector,
    BlockSpec,
    GbmClassifier,
    OcaSelector,
    RfeSelector,
    generate_synthetic,
)


def toy_data(seed=0, n=160):
    spec = BlockSpec.from_lengths([4, 3], n_singles=2)
    ds = generate_synthetic(spec, n, 2, 0.5, seed=seed)
    return np.asarray(ds.features), np.asarray(ds.labels)


def test_gbm_classifier_fits_and_predicts():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((150, 3))
    y = (X[:, 0] > 0).astype(int)
    clf = GbmClassifier(n_trees=20, max_depth=2)
    clf.fit(X, y)
    assert clf.n_features_in_ == 3
    assert (clf.predict(X) == y).mean() > 0.95
    proba = clf.predict_proba(X)
    assert proba.shape == (150, 2)
    assert np.allclose(proba.sum(axis=1), 1.0)
    assert clf.feature_importances_.argmax() == 0


def test_gbm_classifier_feature_mask_param():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((120, 2))
    y = (X[:, 1] > 0).astype(int)
    blind = GbmClassifier(n_trees=15, max_depth=2, feature_mask=[True, False])
    blind.fit(X, y)
    assert (blind.predict(X) == y).mean() < 0.7  # informative column masked out


def test_gbm_classifier_rejects_nonbinary():
    X = np.zeros((10, 2))
    with pytest.raises(ValueError):
        GbmClassifier().fit(X, np.arange(10))


def test_selector_fit_transform_roundtrip():
    X, y = toy_data()
    sel = OcaSelector(block_lengths=[4, 3], n_trees=10, max_depth=2,
                      learning_rate=0.3, min_samples_leaf=2)
    Xt = sel.fit_transform(X, y)
    assert Xt.shape[0] == X.shape[0]
    assert Xt.shape[1] == sel.get_support().sum() >= 1
    assert sel.result_.stop_reason in ("converged", "max_iterations")
    assert 0.0 <= sel.test_score_ <= 1.0
    np.testing.assert_array_equal(Xt, X[:, sel.get_support()])


def test_selector_not_fitted():
    sel = BcaSelector()
    with pytest.raises(NotFittedError):
        sel.transform(np.zeros((3, 5)))


def test_selectors_clone_and_get_params():
    for est in (
        OcaSelector(block_lengths=[4, 3], eps2=0.0),
        BcaSelector(itmax=7),
        RfeSelector(n_features_to_select=3, step=2),
    ):
        cloned = clone(est)
        assert cloned.get_params() == est.get_params()


def test_rfe_selector_requires_target():
    X, y = toy_data()
    with pytest.raises(ValueError, match="number of features to keep"):
        RfeSelector().fit(X, y)


def test_rfe_selector_exact_target():
    X, y = toy_data()
    sel = RfeSelector(n_features_to_select=3, n_trees=10, max_depth=2,
                      learning_rate=0.3, min_samples_leaf=2)
    sel.fit(X, y)
    assert sel.get_support().sum() == 3


def test_bca_selector_runs():
    X, y = toy_data(seed=3)
    sel = BcaSelector(n_trees=10, max_depth=2, learning_rate=0.3, min_samples_leaf=2)
    sel.fit(X, y)
    assert 1 <= sel.get_support().sum() <= 9
    assert sel.n_evaluations_ >= 9


def test_selector_block_lengths_validation():
    X, y = toy_data()
    with pytest.raises(ValueError, match="block lengths"):
        OcaSelector(block_lengths=[8, 8]).fit(X, y)


def test_selector_in_pipeline():
    X, y = toy_data(seed=5)
    pipe = Pipeline([
        ("select", BcaSelector(n_trees=8, max_depth=2, learning_rate=0.3,
                               min_samples_leaf=2, itmax=3)),
        ("clf", GbmClassifier(n_trees=10, max_depth=2)),
    ])
    pipe.fit(X, y)
    acc = (pipe.predict(X) == y).mean()
    assert acc > 0.6


def test_selector_deterministic():
    X, y = toy_data(seed=7)
    a = OcaSelector(block_lengths=[4, 3], n_trees=8, max_depth=2,
                    learning_rate=0.3, min_samples_leaf=2).fit(X, y)
    b = OcaSelector(block_lengths=[4, 3], n_trees=8, max_depth=2,
                    learning_rate=0.3, min_samples_leaf=2).fit(X, y)
    np.testing.assert_array_equal(a.support_, b.support_)
    assert a.test_score_ == b.test_score_
