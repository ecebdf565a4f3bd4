"""CART classification tree with Gini impurity.

Split rule: for every candidate feature, thresholds are the midpoints between
consecutive distinct sorted values and a row goes left when
``x[feature] <= threshold``. The split with the largest weighted Gini
decrease wins; ties go to the lowest feature index, then the smallest
threshold. A node becomes a leaf when it is pure, hits ``max_depth``, cannot
be split into two children of ``min_samples_leaf`` rows, or no split lowers
the impurity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numba
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..errors import DomainError, ParameterError
from ..validation import check_array, check_is_fitted_attr, check_X_y
from ._seeding import stream

# Two splits whose scores differ by less than this (relative to the node
# size) are treated as tied. Float round-off is ~1e-15; distinct rational
# scores on small nodes are far apart, so ties are resolved exactly there.
_TIE_RTOL = 1e-12


def gini(class_counts):
    """Gini impurity ``1 - sum(p_i^2)`` of a vector of class counts."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if np.any(counts < 0):
        raise DomainError("class counts must be non-negative")
    total = counts.sum()
    if total <= 0:
        raise DomainError("gini of an empty node is undefined")
    p = counts / total
    return float(1.0 - np.dot(p, p))


class Split(NamedTuple):
    feature: int
    threshold: float
    decrease: float


@numba.njit(cache=True)
def _split_rows(X, y, rows, candidates, n_classes, min_samples_leaf, tie_rtol):
    """Best split of ``X[rows]``; returns (feature or -1, threshold, score, parent_score).

    ``score`` is S = sum(cL^2)/nL + sum(cR^2)/nR. The squared-count sums are
    updated in integers as rows move left, so S is exact up to the two final
    divisions.
    """
    n = rows.shape[0]
    total = np.zeros(n_classes, np.int64)
    for r in rows:
        total[y[r]] += 1
    total_sq = 0
    for c in range(n_classes):
        total_sq += total[c] * total[c]
    parent = total_sq / n
    tol = tie_rtol * n

    best_f = -1
    best_thr = 0.0
    best_score = 0.0
    best_top = parent + tol
    xs = np.empty(n, np.float64)
    scores = np.empty(n - 1, np.float64)
    left = np.zeros(n_classes, np.int64)
    right = np.zeros(n_classes, np.int64)
    for f in candidates:
        for i in range(n):
            xs[i] = X[rows[i], f]
        order = np.argsort(xs, kind="mergesort")
        left[:] = 0
        right[:] = total
        left_sq = 0
        right_sq = total_sq
        top = -np.inf
        for i in range(n - 1):
            c = y[rows[order[i]]]
            left_sq += 2 * left[c] + 1
            left[c] += 1
            right_sq -= 2 * right[c] - 1
            right[c] -= 1
            n_left = i + 1
            n_right = n - n_left
            scores[i] = -np.inf
            if n_left < min_samples_leaf or n_right < min_samples_leaf:
                continue
            if xs[order[i + 1]] > xs[order[i]]:
                scores[i] = left_sq / n_left + right_sq / n_right
                if scores[i] > top:
                    top = scores[i]
        if top == -np.inf:
            continue
        bar = best_top + tol if best_f >= 0 else best_top
        if top > bar:
            for i in range(n - 1):
                if scores[i] >= top - tol:
                    lo = xs[order[i]]
                    hi = xs[order[i + 1]]
                    mid = lo + (hi - lo) / 2.0
                    best_thr = mid if (lo <= mid and mid < hi) else lo
                    best_score = scores[i]
                    break
            best_f = f
            best_top = top
    return best_f, best_thr, best_score, parent


def best_split(X, y, candidate_features=None, n_classes=None, min_samples_leaf=1):
    """Best Gini split of ``(X, y)`` among ``candidate_features``.

    ``y`` holds integer class codes ``0..n_classes-1``. The returned
    ``decrease`` is ``gini(node) - weighted gini(children)``, the within-node
    impurity decrease. Returns ``None`` when no admissible split lowers the
    impurity.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if X.ndim != 2 or len(y) != X.shape[0]:
        raise ValueError("X must be 2-D with one row per target")
    if candidate_features is None:
        candidate_features = range(X.shape[1])
    if n_classes is None:
        n_classes = int(y.max()) + 1 if len(y) else 1
    return _best_split_rows(
        X, y, np.arange(len(y), dtype=np.int64), candidate_features, n_classes, min_samples_leaf
    )


def _best_split_rows(X, y, rows, candidate_features, n_classes, min_samples_leaf):
    n = len(rows)
    if n < 2 or n < 2 * min_samples_leaf:
        return None
    if isinstance(candidate_features, np.ndarray) and candidate_features.dtype == np.int64:
        candidates = candidate_features
    else:
        candidates = np.unique(np.asarray(list(candidate_features), dtype=np.int64))
    f, threshold, score, parent = _split_rows(
        X, y, rows, candidates, n_classes, min_samples_leaf, _TIE_RTOL
    )
    if f < 0:
        return None
    return Split(int(f), float(threshold), (score - parent) / n)


@dataclass(frozen=True)
class LeafNode:
    class_counts: tuple


@dataclass(frozen=True)
class InternalNode:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[LeafNode, InternalNode]


class Tree:
    """Fitted tree stored as parallel node arrays in depth-first order.

    ``feature[i] == -1`` marks a leaf. ``value[i]`` holds the class counts of
    the training rows that reached node ``i``.
    """

    def __init__(self, feature, threshold, left, right, value, n_node_samples, impurity):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)
        self.n_node_samples = np.asarray(n_node_samples, dtype=np.int64)
        self.impurity = np.asarray(impurity, dtype=np.float64)

    @property
    def node_count(self):
        return len(self.feature)

    @property
    def n_classes(self):
        return self.value.shape[1]

    @property
    def max_depth(self):
        depth = np.zeros(self.node_count, dtype=np.int64)
        for i in range(self.node_count):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max()) if self.node_count else 0

    def apply(self, X):
        """Index of the leaf each row of ``X`` lands in."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.arange(X.shape[0])
        while active.size:
            feat = self.feature[node[active]]
            internal = feat >= 0
            active, feat = active[internal], feat[internal]
            if not active.size:
                break
            cur = node[active]
            go_left = X[active, feat] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
        return node

    def predict_proba(self, X):
        counts = self.value[self.apply(X)]
        return counts / counts.sum(axis=1, keepdims=True)

    def to_nodes(self, i=0) -> TreeNode:
        if self.feature[i] < 0:
            return LeafNode(tuple(int(c) for c in self.value[i]))
        return InternalNode(
            int(self.feature[i]),
            float(self.threshold[i]),
            self.to_nodes(int(self.left[i])),
            self.to_nodes(int(self.right[i])),
        )

    def arrays(self):
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
            "n_node_samples": self.n_node_samples,
            "impurity": self.impurity,
        }

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        a, b = self.arrays(), other.arrays()
        return all(np.array_equal(a[k], b[k]) for k in a)


def resolve_max_features(max_features, n_features):
    if max_features is None or max_features == "all":
        return n_features
    if max_features == "sqrt":
        return max(1, int(np.floor(np.sqrt(n_features))))
    if max_features == "log2":
        return max(1, int(np.floor(np.log2(n_features))))
    if isinstance(max_features, float) and not isinstance(max_features, bool):
        if not 0.0 < max_features <= 1.0:
            raise ParameterError(f"max_features fraction must lie in (0, 1], got {max_features}")
        return max(1, int(max_features * n_features))
    if isinstance(max_features, (int, np.integer)) and not isinstance(max_features, bool):
        if not 1 <= max_features <= n_features:
            raise ParameterError(f"max_features must lie in 1..{n_features}, got {max_features}")
        return int(max_features)
    raise ParameterError(f"invalid max_features {max_features!r}")


def fit_tree(X, y, n_classes=None, *, max_depth=None, min_samples_leaf=1, max_features=None, rng=None):
    """Grow a CART tree on integer-coded targets.

    At every node ``max_features`` distinct feature indices are drawn without
    replacement from ``rng`` (no draw when all features are candidates), and
    the node is split by :func:`best_split`. Nodes are visited depth first,
    left child first, which fixes the order in which ``rng`` is consumed.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if len(y) == 0:
        raise ValueError("cannot fit a tree on zero rows")
    if max_depth is not None and max_depth < 0:
        raise ParameterError(f"max_depth must be >= 0, got {max_depth}")
    if min_samples_leaf < 1:
        raise ParameterError(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")
    n_features = X.shape[1]
    mtry = resolve_max_features(max_features, n_features)
    if mtry < n_features and rng is None:
        raise ParameterError("a random generator is required when max_features < n_features")
    if n_classes is None:
        n_classes = int(y.max()) + 1

    all_features = np.arange(n_features, dtype=np.int64)
    feature, threshold, left, right, value, n_samples, impurity = ([] for _ in range(7))
    # (row indices, depth, parent id, is left child)
    stack = [(np.arange(len(y), dtype=np.int64), 0, -1, False)]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node_id
        counts = np.bincount(y[rows], minlength=n_classes).astype(np.float64)
        p = counts / len(rows)
        node_gini = 1.0 - float(p @ p)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts)
        n_samples.append(len(rows))
        impurity.append(node_gini)

        if counts.max() == len(rows) or (max_depth is not None and depth >= max_depth):
            continue
        if len(rows) < 2 * min_samples_leaf:
            continue
        if mtry < n_features:
            candidates = np.sort(rng.choice(n_features, size=mtry, replace=False))
        else:
            candidates = all_features
        split = _best_split_rows(X, y, rows, candidates, n_classes, min_samples_leaf)
        if split is None:
            continue
        feature[node_id] = split.feature
        threshold[node_id] = split.threshold
        go_left = X[rows, split.feature] <= split.threshold
        stack.append((rows[~go_left], depth + 1, node_id, False))
        stack.append((rows[go_left], depth + 1, node_id, True))

    return Tree(feature, threshold, left, right, np.array(value), n_samples, impurity)


class DecisionTreeClassifier(ClassifierMixin, BaseEstimator):
    """Single CART tree with the estimator interface.

    Parameters mirror :func:`fit_tree`; ``random_state`` seeds the feature
    subsampling stream and is only used when ``max_features`` is below the
    number of features.
    """

    def __init__(self, max_depth=None, min_samples_leaf=1, max_features=None, random_state=None):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_, codes = np.unique(y, return_inverse=True)
        self.n_features_in_ = X.shape[1]
        rng = stream(0 if self.random_state is None else self.random_state)
        self.tree_ = fit_tree(
            X,
            codes,
            len(self.classes_),
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            max_features=self.max_features,
            rng=rng,
        )
        return self

    def predict_proba(self, X):
        check_is_fitted_attr(self, "tree_")
        X = check_array(X, n_features=self.n_features_in_)
        return self.tree_.predict_proba(X)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
