"""Input validation helpers shared by the estimators."""

import numpy as np
from sklearn.exceptions import NotFittedError

from .errors import DimensionError, ParameterError


def check_array(X, n_features=None, allow_empty=True):
    """Return ``X`` as a finite 2-D float64 array.

    Raises:
        DimensionError: ``X`` is not 2-D or its width differs from ``n_features``.
        ValueError: ``X`` contains NaN or infinity.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1 and n_features is not None and X.shape[0] == n_features:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise DimensionError(f"expected a 2-D feature array, got shape {X.shape}")
    if n_features is not None and X.shape[1] != n_features:
        raise DimensionError(f"expected {n_features} features, got {X.shape[1]}")
    if not allow_empty and X.shape[0] == 0:
        raise ValueError("empty feature array")
    if not np.isfinite(X).all():
        raise ValueError("feature array contains NaN or infinity")
    return X


def check_X_y(X, y):
    X = check_array(X, allow_empty=False)
    y = np.asarray(y)
    if y.ndim != 1:
        raise DimensionError(f"expected a 1-D target, got shape {y.shape}")
    if len(y) != X.shape[0]:
        raise DimensionError(f"X has {X.shape[0]} rows but y has {len(y)}")
    return X, y


def check_is_fitted_attr(estimator, attr):
    if not hasattr(estimator, attr):
        raise NotFittedError(f"{type(estimator).__name__} is not fitted yet; call fit first")


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
