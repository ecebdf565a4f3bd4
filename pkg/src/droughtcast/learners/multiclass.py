"""One-vs-rest reduction of a K-class problem to K binary problems."""

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin, clone

from ..errors import TrainingError
from ..validation import check_is_fitted_attr, check_X_y
from ._seeding import child_seed


def _fit_binary(estimator, X, target):
    return estimator.fit(X, target)


class OneVsRestClassifier(ClassifierMixin, BaseEstimator):
    """Train one ``class k vs rest`` copy of ``estimator`` per class.

    The copy for class ``k`` gets ``random_state = child_seed(random_state, k)``
    when the base estimator has that parameter. Probabilities are the
    per-class positive scores renormalised to sum to one (uniform when every
    score is zero).

    Args:
        estimator: binary base classifier with ``predict_proba``.
        classes: optional explicit class list; every listed class must occur
            in the training targets.
        random_state: master seed for the per-class copies.
        n_jobs: parallel workers across classes.
    """

    def __init__(self, estimator, classes=None, random_state=0, n_jobs=None):
        self.estimator = estimator
        self.classes = classes
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        present = np.unique(y)
        classes = present if self.classes is None else np.asarray(self.classes)
        for c in classes:
            if not np.any(y == c):
                raise TrainingError(f"class {c!r} has no training rows")
        if len(classes) < 2:
            raise TrainingError("one-vs-rest needs at least two classes")
        unknown = np.setdiff1d(present, classes)
        if unknown.size:
            raise TrainingError(f"targets contain classes outside the class list: {unknown.tolist()}")
        seed = 0 if self.random_state is None else int(self.random_state)

        members = []
        for k in range(len(classes)):
            est = clone(self.estimator)
            if "random_state" in est.get_params():
                est.set_params(random_state=child_seed(seed, k))
            members.append(est)
        targets = [(y == c).astype(np.int64) for c in classes]
        if self.n_jobs in (None, 1):
            self.estimators_ = [_fit_binary(e, X, t) for e, t in zip(members, targets)]
        else:
            self.estimators_ = Parallel(n_jobs=self.n_jobs)(
                delayed(_fit_binary)(e, X, t) for e, t in zip(members, targets)
            )
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        return self

    def positive_scores(self, X):
        check_is_fitted_attr(self, "estimators_")
        cols = []
        for est in self.estimators_:
            proba = est.predict_proba(X)
            pos = np.flatnonzero(est.classes_ == 1)
            cols.append(proba[:, pos[0]] if pos.size else np.zeros(proba.shape[0]))
        return np.column_stack(cols)

    def predict_proba(self, X):
        scores = self.positive_scores(X)
        total = scores.sum(axis=1, keepdims=True)
        uniform = np.full_like(scores, 1.0 / scores.shape[1])
        with np.errstate(invalid="ignore", divide="ignore"):
            normed = scores / total
        return np.where(total > 0, normed, uniform)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
