"""Soft-voting ensemble over probability-producing classifiers."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..errors import ParameterError, TrainingError
from ..validation import check_is_fitted_attr


class SoftVotingClassifier(ClassifierMixin, BaseEstimator):
    """Average the members' class probabilities, then take the argmax.

    Args:
        estimators: list of ``(name, estimator)`` pairs; at least two. Each
            must expose ``predict_proba`` and ``classes_`` after fitting.
        weights: optional per-member weights; uniform when ``None``.
    """

    def __init__(self, estimators, weights=None):
        self.estimators = estimators
        self.weights = weights

    def _check_members(self):
        if len(self.estimators) < 2:
            raise ParameterError("a voting ensemble needs at least two members")
        if self.weights is not None:
            if len(self.weights) != len(self.estimators):
                raise ParameterError("weights must match the number of members")
            if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
                raise ParameterError("weights must be non-negative with a positive sum")

    def _collect_classes(self):
        members = [est for _, est in self.estimators]
        classes = members[0].classes_
        for (name, est) in self.estimators[1:]:
            if not np.array_equal(est.classes_, classes):
                raise TrainingError(f"member {name!r} has classes {est.classes_}, expected {classes}")
        self.classes_ = np.asarray(classes)
        self.n_features_in_ = getattr(members[0], "n_features_in_", None)

    def fit(self, X, y):
        """Fit every member on ``(X, y)`` in place."""
        self._check_members()
        for _, est in self.estimators:
            est.fit(X, y)
        self._collect_classes()
        return self

    @classmethod
    def from_fitted(cls, estimators, weights=None):
        """Wrap already-fitted members without refitting them."""
        ens = cls(estimators, weights)
        ens._check_members()
        ens._collect_classes()
        return ens

    @property
    def named_estimators_(self):
        return dict(self.estimators)

    def predict_proba(self, X):
        check_is_fitted_attr(self, "classes_")
        weights = self.weights or [1.0] * len(self.estimators)
        total = None
        for (_, est), w in zip(self.estimators, weights):
            proba = est.predict_proba(X) * w
            total = proba if total is None else total + proba
        return total / float(sum(weights))

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
