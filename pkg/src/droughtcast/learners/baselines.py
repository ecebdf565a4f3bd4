"""Reference baselines: k-nearest neighbours and logistic regression."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..errors import ParameterError, TrainingError
from ..validation import check_array, check_is_fitted_attr, check_positive_int, check_X_y

# cap on elements of the (query, train, feature) difference block
_BLOCK_ELEMENTS = 4_000_000


class KNeighborsClassifier(ClassifierMixin, BaseEstimator):
    """Brute-force Euclidean k-NN with majority vote.

    Equal distances are ordered by training row index, and a tied vote goes
    to the lowest class.
    """

    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        k = check_positive_int(self.n_neighbors, "n_neighbors")
        X, y = check_X_y(X, y)
        if k > X.shape[0]:
            raise ParameterError(f"n_neighbors={k} exceeds the {X.shape[0]} training rows")
        self.classes_, self._codes = np.unique(y, return_inverse=True)
        self._X = X
        self.n_features_in_ = X.shape[1]
        return self

    def kneighbors(self, X):
        """Indices of the ``n_neighbors`` nearest training rows, nearest first."""
        check_is_fitted_attr(self, "_X")
        X = check_array(X, n_features=self.n_features_in_)
        out = np.empty((X.shape[0], self.n_neighbors), dtype=np.int64)
        chunk = max(1, _BLOCK_ELEMENTS // max(1, self._X.size))
        for lo in range(0, X.shape[0], chunk):
            q = X[lo : lo + chunk]
            d = ((q[:, None, :] - self._X[None, :, :]) ** 2).sum(axis=2)
            out[lo : lo + len(q)] = np.argsort(d, axis=1, kind="stable")[:, : self.n_neighbors]
        return out

    def predict_proba(self, X):
        idx = self.kneighbors(X)
        votes = np.zeros((idx.shape[0], len(self.classes_)))
        for j in range(idx.shape[1]):
            np.add.at(votes, (np.arange(idx.shape[0]), self._codes[idx[:, j]]), 1.0)
        return votes / self.n_neighbors

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


def knn_predict(train_X, train_y, query, k=5):
    """Class of a single ``query`` point by :class:`KNeighborsClassifier`."""
    model = KNeighborsClassifier(n_neighbors=k).fit(train_X, train_y)
    return model.predict(np.asarray(query, dtype=np.float64).reshape(1, -1))[0]


class LogisticRegression(ClassifierMixin, BaseEstimator):
    """Binary logistic regression by full-batch gradient descent.

    Minimises mean log-loss plus ``l2/2 * ||w||^2`` (the intercept is not
    penalised), starting from zero weights.
    """

    def __init__(self, learning_rate=0.5, epochs=500, l2=0.0):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        epochs = check_positive_int(self.epochs, "epochs")
        if self.learning_rate <= 0:
            raise ParameterError("learning_rate must be positive")
        self.classes_, codes = np.unique(y, return_inverse=True)
        if len(self.classes_) != 2:
            raise TrainingError(f"logistic regression needs exactly two classes, got {len(self.classes_)}")
        t = codes.astype(np.float64)
        n, d = X.shape
        w = np.zeros(d)
        b = 0.0
        for _ in range(epochs):
            p = _sigmoid(X @ w + b)
            err = p - t
            w -= self.learning_rate * (X.T @ err / n + self.l2 * w)
            b -= self.learning_rate * err.mean()
        self.coef_ = w
        self.intercept_ = b
        self.n_features_in_ = d
        return self

    def decision_function(self, X):
        check_is_fitted_attr(self, "coef_")
        X = check_array(X, n_features=self.n_features_in_)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))
