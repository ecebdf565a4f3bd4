"""Bootstrap random forest of CART trees."""

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import check_array, check_is_fitted_attr, check_positive_int, check_X_y
from ._seeding import stream
from .tree import fit_tree, resolve_max_features


def _grow(X, codes, n_classes, seed, index, bootstrap, params):
    rng = stream(seed, index)
    n = len(codes)
    rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
    return fit_tree(X[rows], codes[rows], n_classes, rng=rng, **params)


class RandomForestClassifier(ClassifierMixin, BaseEstimator):
    """Random forest with per-tree bootstrap samples and feature subsampling.

    Tree ``i`` draws its bootstrap rows and all of its feature subsets from
    the stream addressed by ``(random_state, i)``, so a forest is identical
    whatever ``n_jobs`` is.

    Args:
        n_estimators: number of trees.
        max_features: candidate features per split; ``"sqrt"`` (default),
            ``"log2"``, an int, a fraction, or ``None`` for all.
        min_samples_leaf: minimum rows in each child of a split.
        max_depth: depth limit, ``None`` for unlimited.
        bootstrap: draw ``n`` rows with replacement per tree.
        random_state: master seed.
        n_jobs: parallel workers for training (joblib semantics).
    """

    def __init__(
        self,
        n_estimators=100,
        max_features="sqrt",
        min_samples_leaf=1,
        max_depth=None,
        bootstrap=True,
        random_state=0,
        n_jobs=None,
    ):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf
        self.max_depth = max_depth
        self.bootstrap = bootstrap
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _tree_params(self):
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
        }

    def fit(self, X, y):
        n_estimators = check_positive_int(self.n_estimators, "n_estimators")
        X, y = check_X_y(X, y)
        resolve_max_features(self.max_features, X.shape[1])
        self.classes_, codes = np.unique(y, return_inverse=True)
        codes = codes.astype(np.int64)
        self.n_features_in_ = X.shape[1]
        seed = 0 if self.random_state is None else int(self.random_state)
        params = self._tree_params()
        jobs = (
            delayed(_grow)(X, codes, len(self.classes_), seed, i, self.bootstrap, params)
            for i in range(n_estimators)
        )
        if self.n_jobs in (None, 1):
            self.estimators_ = [fn(*a, **kw) for fn, a, kw in jobs]
        else:
            self.estimators_ = Parallel(n_jobs=self.n_jobs)(jobs)
        return self

    def predict_proba(self, X):
        check_is_fitted_attr(self, "estimators_")
        X = check_array(X, n_features=self.n_features_in_)
        total = np.zeros((X.shape[0], len(self.classes_)))
        for tree in self.estimators_:
            total += tree.predict_proba(X)
        return total / len(self.estimators_)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    @property
    def feature_importances_(self):
        from ..importance import mdi_importance

        return mdi_importance(self)
