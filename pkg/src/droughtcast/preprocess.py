"""Labels, min-max scaling and the seeded train/test split."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DomainError, ParameterError
from .features import FEATURES, SCORE_MAX, SCORE_MIN
from .validation import check_array, check_is_fitted_attr

DEFAULT_SEED = 20
DEFAULT_TRAIN_FRACTION = 0.7


@dataclass(frozen=True)
class LabeledSample:
    fips: str
    date: dt.date
    features: tuple
    intensity_class: int

    @property
    def presence(self):
        return self.intensity_class >= 1


@dataclass(frozen=True)
class ScalerParams:
    min_: np.ndarray
    max_: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.min_) > np.asarray(self.max_)):
            raise ValueError("scaler min exceeds max for some feature")


def discretize_score(score):
    """Round a score in [0, 5] half-up to its intensity class.

    0 means no drought and class k in 1..5 stands for D(k-1). Accepts a scalar
    (returns ``int``) or an array (returns an ``int64`` array).
    """
    values = np.asarray(score, dtype=np.float64)
    if np.any(np.isnan(values)) or np.any((values < SCORE_MIN) | (values > SCORE_MAX)):
        raise DomainError(f"score outside [{SCORE_MIN}, {SCORE_MAX}]: {score!r}")
    classes = np.floor(values + 0.5).astype(np.int64)
    if classes.ndim == 0:
        return int(classes)
    return classes


class MinMaxScaler(TransformerMixin, BaseEstimator):
    """Per-feature affine rescaling to [0, 1].

    Constant features map to 0. Values outside the fitted range are clamped,
    so unseen data stays in [0, 1] as well.
    """

    def __init__(self, clip=True):
        self.clip = clip

    def fit(self, X, y=None):
        X = check_array(X)
        if X.shape[0] == 0:
            raise ValueError("cannot fit a scaler on zero rows")
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted_attr(self, "data_min_")
        X = check_array(X, n_features=self.n_features_in_)
        span = self.data_max_ - self.data_min_
        constant = span == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (X - self.data_min_) / np.where(constant, 1.0, span)
        out[:, constant] = 0.0
        if self.clip:
            np.clip(out, 0.0, 1.0, out=out)
        return out

    @property
    def params_(self):
        check_is_fitted_attr(self, "data_min_")
        return ScalerParams(self.data_min_.copy(), self.data_max_.copy())

    @classmethod
    def from_params(cls, params: ScalerParams):
        scaler = cls()
        scaler.data_min_ = np.asarray(params.min_, dtype=np.float64)
        scaler.data_max_ = np.asarray(params.max_, dtype=np.float64)
        scaler.n_features_in_ = len(scaler.data_min_)
        return scaler


def fit_scaler(samples) -> ScalerParams:
    """Column-wise min and max over a feature matrix or sample frame."""
    return MinMaxScaler().fit(feature_matrix(samples)).params_


def apply_scaler(params: ScalerParams, samples):
    return MinMaxScaler.from_params(params).transform(feature_matrix(samples))


def feature_matrix(samples, names=FEATURES):
    if isinstance(samples, pd.DataFrame):
        return samples[list(names)].to_numpy(dtype=np.float64)
    return check_array(samples)


def label_samples(samples: pd.DataFrame) -> pd.DataFrame:
    """Add ``intensity_class`` and ``presence`` columns derived from ``score``."""
    out = samples.copy()
    out["intensity_class"] = discretize_score(out["score"].to_numpy())
    out["presence"] = out["intensity_class"] >= 1
    return out


def frame_to_labeled(frame: pd.DataFrame) -> list[LabeledSample]:
    feats = frame[list(FEATURES)].to_numpy(dtype=np.float64)
    return [
        LabeledSample(f, d.date(), tuple(feats[i].tolist()), int(c))
        for i, (f, d, c) in enumerate(zip(frame["fips"], frame["date"], frame["intensity_class"]))
    ]


def n_train_rows(n, train_fraction=DEFAULT_TRAIN_FRACTION):
    """``ceil(train_fraction * n)`` computed exactly (no float round-off)."""
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    return math.ceil(Fraction(str(train_fraction)) * n)


def split_indices(n, seed=DEFAULT_SEED, train_fraction=DEFAULT_TRAIN_FRACTION):
    """Shuffle ``range(n)`` with ``seed``; the first ``ceil(f*n)`` go to train."""
    perm = np.random.default_rng(seed).permutation(n)
    cut = n_train_rows(n, train_fraction)
    return perm[:cut], perm[cut:]


def split_70_30(samples, seed=DEFAULT_SEED, train_fraction=DEFAULT_TRAIN_FRACTION):
    """Seeded unstratified split of a frame, array or list into (train, test)."""
    n = len(samples)
    if n < 10:
        raise ValueError(f"need at least 10 samples to split, got {n}")
    train_idx, test_idx = split_indices(n, seed, train_fraction)
    if isinstance(samples, pd.DataFrame):
        return samples.iloc[train_idx], samples.iloc[test_idx]
    if isinstance(samples, np.ndarray):
        return samples[train_idx], samples[test_idx]
    return [samples[i] for i in train_idx], [samples[i] for i in test_idx]


def presence_subset(labeled: pd.DataFrame):
    """All rows; target is 1 when the intensity class is at least D0."""
    return labeled, labeled["presence"].to_numpy().astype(np.int64)


def intensity_subset(labeled: pd.DataFrame):
    """Drought rows only; target is the intensity class 1..5."""
    rows = labeled.loc[labeled["intensity_class"] >= 1]
    return rows, rows["intensity_class"].to_numpy().astype(np.int64)


def task_subset(labeled: pd.DataFrame, task: str):
    if task == "presence":
        return presence_subset(labeled)
    if task == "intensity":
        return intensity_subset(labeled)
    raise ParameterError(f"unknown task {task!r}; expected 'presence' or 'intensity'")
