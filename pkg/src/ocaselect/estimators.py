"""Scikit-learn style wrappers so the selectors and the scorer compose with
pipelines: fit/transform/predict, get_params, standard input validation.

Columns fed to the block-aware selectors must already be in layout order
(block 1 columns, block 2 columns, ..., then singles), matching how the
block lengths are declared.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import ascent, baselines
from .data import BlockSpec, Dataset, split as split_dataset
from .gbm import GbmConfig, fit as fit_gbm, importances
from .masks import FeatureMask


def _check_binary(y) -> np.ndarray:
    y = np.asarray(y)
    uniq = np.unique(y)
    if not np.isin(uniq, (0, 1)).all():
        raise ValueError(f"labels must take values in {{0, 1}}, got {uniq.tolist()}")
    return y.astype(np.int8)


def _layout_for(n_features: int, block_lengths) -> BlockSpec:
    if block_lengths is None:
        return BlockSpec.from_lengths([], n_singles=n_features)
    total = int(sum(block_lengths))
    if total > n_features:
        raise ValueError(
            f"block lengths sum to {total} but the data has only {n_features} columns"
        )
    return BlockSpec.from_lengths(list(block_lengths), n_singles=n_features - total)


class GbmClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier over the built-in boosted regression trees.

    ``feature_mask`` (optional boolean array) restricts split candidates
    without dropping columns, exactly as the selection methods score subsets.
    """

    def __init__(self, n_trees=50, max_depth=3, learning_rate=0.1,
                 min_samples_leaf=5, seed=0, feature_mask=None):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.seed = seed
        self.feature_mask = feature_mask

    def _config(self) -> GbmConfig:
        return GbmConfig(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            learning_rate=self.learning_rate,
            min_samples_leaf=self.min_samples_leaf,
            seed=self.seed,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        y = _check_binary(y)
        n_features = X.shape[1]
        if self.feature_mask is None:
            mask = FeatureMask.all_ones(n_features)
        else:
            mask = FeatureMask(np.asarray(self.feature_mask, dtype=bool))
            if len(mask) != n_features:
                raise ValueError("feature_mask length does not match X")
        ds = Dataset(X, y, BlockSpec.from_lengths([], n_singles=n_features))
        self.model_ = fit_gbm(ds, mask, self._config())
        self.feature_importances_ = importances(self.model_).importance
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = n_features
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        p1 = self.model_.predict_proba(X)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int8)


class _WrapperSelector(SelectorMixin, BaseEstimator):
    """Shared machinery: internal holdout split, scorer config, fitted mask."""

    def _gbm_config(self) -> GbmConfig:
        return GbmConfig(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            learning_rate=self.learning_rate,
            min_samples_leaf=self.min_samples_leaf,
            seed=self.model_seed,
        )

    def _layout(self, n_features: int) -> BlockSpec:
        return _layout_for(n_features, getattr(self, "block_lengths", None))

    def _run(self, sp) -> ascent.SelectionResult:
        raise NotImplementedError

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        y = _check_binary(y)
        ds = Dataset(X, y, self._layout(X.shape[1]))
        sp = split_dataset(ds, self.train_fraction, self.split_seed)
        result = self._run(sp)
        self.result_ = result
        self.support_ = result.mask.bits.copy()
        self.test_score_ = result.score
        self.n_evaluations_ = result.evaluations
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_


class OcaSelector(_WrapperSelector):
    """Block-aware two-phase coordinate-ascent feature selector."""

    def __init__(self, block_lengths=None, train_fraction=0.7, split_seed=0,
                 n_trees=50, max_depth=3, learning_rate=0.1, min_samples_leaf=5,
                 model_seed=0, eps1=1e-6, eps2=1e-6, itmax1=20, itmax2=50, seed=0):
        self.block_lengths = block_lengths
        self.train_fraction = train_fraction
        self.split_seed = split_seed
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.model_seed = model_seed
        self.eps1 = eps1
        self.eps2 = eps2
        self.itmax1 = itmax1
        self.itmax2 = itmax2
        self.seed = seed

    def _run(self, sp):
        cfg = ascent.OcaConfig(
            eps1=self.eps1, eps2=self.eps2,
            itmax1=self.itmax1, itmax2=self.itmax2, seed=self.seed,
        )
        return ascent.run_oca(sp, self._gbm_config(), cfg)


class BcaSelector(_WrapperSelector):
    """Bit-flip coordinate-ascent selector starting from all features."""

    def __init__(self, train_fraction=0.7, split_seed=0, n_trees=50, max_depth=3,
                 learning_rate=0.1, min_samples_leaf=5, model_seed=0,
                 eps=1e-6, itmax=50):
        self.train_fraction = train_fraction
        self.split_seed = split_seed
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.model_seed = model_seed
        self.eps = eps
        self.itmax = itmax

    def _run(self, sp):
        return baselines.run_bca(sp, self._gbm_config(), eps=self.eps, itmax=self.itmax)


class RfeSelector(_WrapperSelector):
    """Recursive elimination down to a required target size."""

    def __init__(self, n_features_to_select=None, step=1, train_fraction=0.7,
                 split_seed=0, n_trees=50, max_depth=3, learning_rate=0.1,
                 min_samples_leaf=5, model_seed=0):
        self.n_features_to_select = n_features_to_select
        self.step = step
        self.train_fraction = train_fraction
        self.split_seed = split_seed
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.model_seed = model_seed

    def _run(self, sp):
        if self.n_features_to_select is None:
            raise ValueError("recursive elimination requires the number of features to keep")
        rfe = baselines.RfeConfig(
            n_features_to_select=self.n_features_to_select, step=self.step
        )
        return baselines.run_rfe(sp, self._gbm_config(), rfe)
