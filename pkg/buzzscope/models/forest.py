#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Random forest with balanced subsample class weights.

Each tree sees a bootstrap of the rows, expressed as per-row sample weights (bootstrap counts)
multiplied by class weights n/(2*n_c) computed on that bootstrap. Trees are grown by
scikit-learn's DecisionTreeClassifier (Gini, sqrt(#features) candidates, min-leaf 1, unlimited
depth) and then flattened into plain arrays so a forest can be stored and evaluated without
scikit-learn objects.
"""

import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from sklearn.tree import DecisionTreeClassifier
from sklearn.utils.class_weight import compute_class_weight

from buzzscope.errors import ValidationError, ConfigError

logger = logging.getLogger(__name__)

MAX_INT      = np.iinfo(np.int32).max
CLASS_WEIGHT = ["balanced_subsample", "none"]

# Tree ---------------------------------------------------------------------------------------------

@dataclass
class FlatTree:
    feature   : np.ndarray  # int32, -2 on leaves
    threshold : np.ndarray  # float64
    left      : np.ndarray  # int32, -1 on leaves
    right     : np.ndarray  # int32, -1 on leaves
    value     : np.ndarray  # (nodes, 2) weighted class distribution

    @classmethod
    def from_sklearn(cls, tree):
        t     = tree.tree_
        value = t.value[:, 0, :].astype(np.float64)
        value = value/np.maximum(value.sum(axis=1, keepdims=True), np.finfo(np.float64).tiny)
        dist  = np.zeros((t.node_count, 2))
        dist[:, tree.classes_.astype(np.intp)] = value
        return cls(
            feature   = t.feature.astype(np.int32),
            threshold = t.threshold.astype(np.float64),
            left      = t.children_left.astype(np.int32),
            right     = t.children_right.astype(np.int32),
            value     = dist,
        )

    def leaves(self, X32):
        node   = np.zeros(len(X32), dtype=np.intp)
        active = self.left[node] != -1
        while active.any():
            rows = np.flatnonzero(active)
            cur  = node[rows]
            go   = X32[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows]   = np.where(go, self.left[cur], self.right[cur])
            active[rows] = self.left[node[rows]] != -1
        return node

    def predict_proba(self, X32):
        return self.value[self.leaves(X32), 1]

# Forest -------------------------------------------------------------------------------------------

@dataclass
class ForestModel:
    trees        : list
    n_features   : int
    seed         : int = 0
    class_weight : str = "balanced_subsample"

    @property
    def n_trees(self):
        return len(self.trees)

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValidationError(f"forest expects {self.n_features} features, got shape {X.shape}")
        # Splits compare float32 features against float64 thresholds, as they were grown.
        X32 = X.astype(np.float32)
        return np.mean([t.predict_proba(X32) for t in self.trees], axis=0)


def _fit_tree(X, y, tree_seed, class_weight):
    rng     = np.random.default_rng(tree_seed)
    n       = len(y)
    indices = rng.integers(0, n, n)
    weight  = np.bincount(indices, minlength=n).astype(np.float64)
    if class_weight == "balanced_subsample":
        sample  = y[indices]
        classes = np.unique(sample)
        cw      = np.zeros(2)
        cw[classes] = compute_class_weight("balanced", classes=classes, y=sample)
        if len(classes) < 2:
            logger.warning("[forest] bootstrap sample holds a single class")
        weight *= cw[y]
    tree = DecisionTreeClassifier(criterion="gini", max_features="sqrt", min_samples_leaf=1,
                                  random_state=int(tree_seed % MAX_INT))
    tree.fit(X, y, sample_weight=weight)
    return FlatTree.from_sklearn(tree)

def rf_fit(X, y, n_trees=2000, seed=0, class_weight="balanced_subsample", n_jobs=1):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.intp)
    if X.ndim != 2 or len(X) != len(y):
        raise ValidationError(f"features {X.shape} and labels {y.shape} do not line up")
    if not np.isfinite(X).all():
        raise ValidationError("non-finite feature values")
    if not np.isin(y, (0, 1)).all() or len(np.unique(y)) < 2:
        raise ValidationError("random forest needs both classes (0 and 1) in the labels")
    if class_weight not in CLASS_WEIGHT:
        raise ConfigError(f"unknown class weight mode {class_weight}")
    if n_trees < 1:
        raise ConfigError("n_trees must be >= 1")

    # Per-tree seeds depend on the master seed only, never on the number of workers.
    seeds = np.random.default_rng(seed).integers(0, MAX_INT, n_trees)
    logger.info(f"[forest] growing {n_trees} trees on {len(y)} rows ({int(y.sum())} positive)...")
    trees = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_fit_tree)(X, y, int(s), class_weight) for s in seeds)
    return ForestModel(list(trees), X.shape[1], seed, class_weight)
