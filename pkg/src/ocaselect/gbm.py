"""Gradient-boosted regression trees on logistic loss: the subset scorer.

This is the model every selection method wraps: it provides an accuracy
score for any feature mask and impurity-decrease importances for the initial
per-block ranking. Trees split on variance reduction of the residuals, leaf
values are Newton steps, and masked-out features are never considered as
split candidates (no submatrix is materialized).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ._kernels import best_splits_level
from .data import BlockSpec, Dataset, SplitDataset
from .masks import FeatureMask

MIN_GAIN = 1e-12       # below this a split is indistinguishable from roundoff
HESS_FLOOR = 1e-16
LEAF_CLIP = 8.0        # guards the Newton step when hessians vanish on saturated leaves


@dataclass(frozen=True)
class GbmConfig:
    n_trees: int = 50
    max_depth: int = 3
    learning_rate: float = 0.1
    min_samples_leaf: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be a positive integer")
        if self.max_depth < 1:
            raise ValueError("max_depth must be a positive integer")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be a positive integer")


def gini_impurity(labels) -> float:
    """Binary Gini impurity 1 - sum(p^2) of a label vector."""
    y = np.asarray(labels)
    if y.size == 0:
        return 0.0
    p = y.mean()
    return float(1.0 - p * p - (1.0 - p) * (1.0 - p))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class _Presort:
    """Per-column sort of a feature matrix, shared across many fits."""

    def __init__(self, X: np.ndarray):
        order = np.argsort(X, axis=0, kind="stable").T
        self.order = np.ascontiguousarray(order, dtype=np.int32)
        self.xsorted = np.ascontiguousarray(
            np.take_along_axis(X, order.T, axis=0).T, dtype=np.float64
        )


@dataclass
class Tree:
    """Flat-array binary tree; ``feature < 0`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf value for every row of X."""
        cur = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            act = np.flatnonzero(self.feature[cur] >= 0)
            if act.size == 0:
                break
            nodes = cur[act]
            goes_left = X[act, self.feature[nodes]] <= self.threshold[nodes]
            cur[act] = np.where(goes_left, self.left[nodes], self.right[nodes])
        return self.value[cur]

    def node_dict(self, i: int = 0) -> dict:
        if self.feature[i] < 0:
            return {"value": float(self.value[i])}
        return {
            "feature": int(self.feature[i]),
            "threshold": float(self.threshold[i]),
            "left": self.node_dict(int(self.left[i])),
            "right": self.node_dict(int(self.right[i])),
        }

    def split_features(self) -> np.ndarray:
        return self.feature[self.feature >= 0]


@dataclass
class FittedModel:
    trees: list[Tree]
    base_score: float
    config: GbmConfig
    feature_count: int
    mask: FeatureMask
    spec: BlockSpec
    split_gain: np.ndarray = field(repr=False, default=None)

    def predict_margin(self, X: np.ndarray) -> np.ndarray:
        margin = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            margin += self.config.learning_rate * tree.apply(X)
        return margin

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.predict_margin(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "base_score": self.base_score,
            "learning_rate": self.config.learning_rate,
            "trees": [t.node_dict() for t in self.trees],
        }


def fit(train: Dataset, mask: FeatureMask, config: GbmConfig, _presort: _Presort | None = None) -> FittedModel:
    """Boost ``config.n_trees`` regression trees on logistic loss.

    Each round fits a tree to the residuals ``y - p`` with variance-reduction
    splits restricted to masked-in features, assigns leaves their Newton step,
    and updates the margin by ``learning_rate`` times the tree output.
    """
    if len(mask) != train.n_features:
        raise ValueError("mask length does not match the dataset width")
    if mask.popcount() == 0:
        raise ValueError("mask selects no features")
    y = train.labels.astype(np.float64)
    if y.min() == y.max():
        raise ValueError("training data must contain both classes")

    X = train.features
    n = train.n_samples
    presort = _presort if _presort is not None else _Presort(X)
    allowed = np.ascontiguousarray(mask.bits)

    p_base = float(np.clip(y.mean(), 1e-6, 1.0 - 1e-6))
    base = math.log(p_base / (1.0 - p_base))
    margin = np.full(n, base)

    trees: list[Tree] = []
    split_gain = np.zeros(train.n_features)
    for _ in range(config.n_trees):
        p = _sigmoid(margin)
        grad = y - p
        hess = p * (1.0 - p)
        tree, tree_out = _grow_tree(X, presort, grad, hess, allowed, config, split_gain)
        trees.append(tree)
        margin += config.learning_rate * tree_out

    return FittedModel(
        trees=trees,
        base_score=base,
        config=config,
        feature_count=train.n_features,
        mask=mask,
        spec=train.spec,
        split_gain=split_gain,
    )


def _grow_tree(X, presort, grad, hess, allowed, config, split_gain):
    """Level-wise growth; returns the tree and its output on the training rows."""
    n = X.shape[0]
    feature, threshold, left, right, value = [], [], [], [], []
    tree_out = np.zeros(n)

    def leaf_value(g_sum, h_sum):
        return float(np.clip(g_sum / max(h_sum, HESS_FLOOR), -LEAF_CLIP, LEAF_CLIP))

    # node ids are assigned in creation order; slots are per-level positions
    node_of = np.zeros(n, dtype=np.int32)
    level_nodes = [0]
    feature.append(-1); threshold.append(0.0); left.append(-1); right.append(-1); value.append(0.0)

    for depth in range(config.max_depth + 1):
        n_slots = len(level_nodes)
        if n_slots == 0:
            break
        tot_g = np.bincount(node_of[node_of >= 0], weights=grad[node_of >= 0], minlength=n_slots)
        tot_h = np.bincount(node_of[node_of >= 0], weights=hess[node_of >= 0], minlength=n_slots)
        tot_c = np.bincount(node_of[node_of >= 0], minlength=n_slots).astype(np.int64)

        if depth < config.max_depth:
            gains, feats, thrs = best_splits_level(
                presort.order, presort.xsorted, node_of, grad,
                tot_g, tot_c, allowed, config.min_samples_leaf,
            )
        else:
            gains = np.full(n_slots, -1.0)
            feats = np.full(n_slots, -1, dtype=np.int32)
            thrs = np.zeros(n_slots)

        next_left = np.full(n_slots, -1, dtype=np.int32)
        next_right = np.full(n_slots, -1, dtype=np.int32)
        next_nodes = []
        for s, nid in enumerate(level_nodes):
            if feats[s] >= 0 and gains[s] > MIN_GAIN:
                feature[nid] = int(feats[s])
                threshold[nid] = float(thrs[s])
                split_gain[feats[s]] += gains[s]
                for child_slot_arr, side in ((next_left, left), (next_right, right)):
                    child_id = len(feature)
                    feature.append(-1); threshold.append(0.0)
                    left.append(-1); right.append(-1); value.append(0.0)
                    side[nid] = child_id
                    child_slot_arr[s] = len(next_nodes)
                    next_nodes.append(child_id)
            else:
                value[nid] = leaf_value(tot_g[s], tot_h[s])
                tree_out[node_of == s] = value[nid]

        # reassign samples of split slots to child slots for the next level
        rows = np.flatnonzero(node_of >= 0)
        slots = node_of[rows]
        feats_r = feats[slots]
        splitting = feats_r >= 0
        new_node_of = np.full(n, -1, dtype=np.int32)
        rs = rows[splitting]
        goes_left = X[rs, feats_r[splitting]] <= thrs[slots[splitting]]
        new_node_of[rs] = np.where(
            goes_left, next_left[slots[splitting]], next_right[slots[splitting]]
        )
        node_of = new_node_of
        level_nodes = next_nodes

    return (
        Tree(
            feature=np.asarray(feature, dtype=np.int32),
            threshold=np.asarray(threshold),
            left=np.asarray(left, dtype=np.int32),
            right=np.asarray(right, dtype=np.int32),
            value=np.asarray(value),
        ),
        tree_out,
    )


def score(model: FittedModel, test: Dataset, mask: FeatureMask) -> float:
    """Fraction of test rows classified correctly."""
    if mask != model.mask:
        raise ValueError("mask differs from the one the model was fitted with")
    if test.n_features != model.feature_count:
        raise ValueError("test data width does not match the fitted model")
    pred = model.predict(test.features)
    return float((pred == test.labels).mean())


@dataclass(frozen=True)
class ImportanceRanking:
    """Normalized per-feature importances plus per-block descending order."""

    spec: BlockSpec
    importance: np.ndarray
    per_block_order: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        imp = np.asarray(self.importance, dtype=np.float64)
        imp.setflags(write=False)
        object.__setattr__(self, "importance", imp)
        total = imp.sum()
        if not (abs(total - 1.0) < 1e-12 or total == 0.0):
            raise ValueError("importances must sum to 1 (or all be zero)")

    def global_order(self) -> np.ndarray:
        """All features sorted by descending importance, index ascending on ties."""
        return np.lexsort((np.arange(len(self.importance)), -self.importance))


def importances(model: FittedModel) -> ImportanceRanking:
    """Total impurity decrease per feature, summed over trees, normalized to 1.

    Within each block, features are ordered by descending importance with
    ascending feature index breaking ties; a model with no splits yields
    all-zero importances and the identity block order.
    """
    raw = model.split_gain.copy()
    total = raw.sum()
    imp = raw / total if total > 0 else raw
    per_block = []
    for sl in model.spec.block_slices():
        idx = np.arange(sl.start, sl.stop)
        order = idx[np.lexsort((idx, -imp[sl]))]
        per_block.append(tuple(int(i) for i in order))
    return ImportanceRanking(spec=model.spec, importance=imp, per_block_order=tuple(per_block))


class SubsetScorer:
    """Memoized fit-then-score evaluation of feature masks on one split.

    The composite every optimizer calls: fit on the train part, accuracy on
    the test part, cached by exact mask so revisited candidates are free.
    ``evaluations`` counts cache misses (distinct fits); ``calls`` counts all
    evaluations including cache hits. Safe for concurrent use.
    """

    def __init__(self, split: SplitDataset, config: GbmConfig):
        if split.train.n_samples == 0 or split.test.n_samples == 0:
            raise ValueError("both split parts must be non-empty")
        self.split = split
        self.config = config
        self._presort = _Presort(split.train.features)
        self._cache: dict[bytes, float] = {}
        self._lock = threading.Lock()
        self.evaluations = 0
        self.calls = 0

    @property
    def n_features(self) -> int:
        return self.split.train.n_features

    def evaluate(self, mask: FeatureMask) -> float:
        with self._lock:
            self.calls += 1
            key = mask.key()
            hit = self._cache.get(key)
            if hit is not None:
                return hit
            model = fit(self.split.train, mask, self.config, _presort=self._presort)
            value = score(model, self.split.test, mask)
            self._cache[key] = value
            self.evaluations += 1
            return value

    def evaluate_with_model(self, mask: FeatureMask) -> tuple[float, FittedModel]:
        """Like evaluate(), but also returns the fitted model (for rankings)."""
        with self._lock:
            self.calls += 1
            key = mask.key()
            model = fit(self.split.train, mask, self.config, _presort=self._presort)
            if key in self._cache:
                return self._cache[key], model
            value = score(model, self.split.test, mask)
            self._cache[key] = value
            self.evaluations += 1
            return value, model
