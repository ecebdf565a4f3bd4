"""Impurity-based feature importance and the feature-set scenarios.

Three presence models are compared: all 18 features, a set pruned of highly
collinear features, and a set without the ``_MIN``/``_MAX``/``_RANGE``
variants of each measurement.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataWarning, DegenerateError
from .features import FEATURES
from .metrics import accuracy_score
from .preprocess import MinMaxScaler, split_indices
from .validation import check_is_fitted_attr

logger = logging.getLogger(__name__)

FAMILY_SUFFIXES = ("_MIN", "_MAX", "_RANGE")
SCENARIOS = ("full", "collinearity_pruned", "family_pruned")


@dataclass(frozen=True)
class ImportanceReport:
    scenario: str
    features: tuple
    importances: np.ndarray
    accuracy: float

    def ranking(self):
        """Feature names sorted by decreasing importance (ties by position)."""
        order = sorted(range(len(self.features)), key=lambda i: (-self.importances[i], i))
        return [self.features[i] for i in order]

    def top(self, k=3):
        return self.ranking()[:k]


def tree_importance(tree, n_features):
    """Unnormalised MDI of one tree: sum over splits of node fraction x impurity decrease."""
    imp = np.zeros(n_features)
    n_root = tree.n_node_samples[0]
    for i in np.flatnonzero(tree.feature >= 0):
        lo, hi = tree.left[i], tree.right[i]
        n = tree.n_node_samples[i]
        child = (
            tree.n_node_samples[lo] * tree.impurity[lo] + tree.n_node_samples[hi] * tree.impurity[hi]
        ) / n
        imp[tree.feature[i]] += (n / n_root) * (tree.impurity[i] - child)
    return imp


def mdi_importance(forest):
    """Mean decrease in impurity, averaged over the trees of a fitted forest.

    Each tree's vector is normalised to sum to one before averaging. Trees
    without any split carry no information and are skipped.

    Raises:
        DegenerateError: no tree in the forest has a split.
    """
    check_is_fitted_attr(forest, "estimators_")
    per_tree = []
    for tree in forest.estimators_:
        imp = tree_importance(tree, forest.n_features_in_)
        total = imp.sum()
        if total > 0:
            per_tree.append(imp / total)
    if not per_tree:
        raise DegenerateError("no tree in the forest has a split; importance is undefined")
    mean = np.mean(per_tree, axis=0)
    return mean / mean.sum()


def correlation_matrix(X):
    """Pearson correlation with zero-variance columns set to 0 (diagonal 1)."""
    X = np.asarray(X, dtype=np.float64)
    centered = X - X.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    constant = norms == 0
    safe = np.where(constant, 1.0, norms)
    r = (centered.T @ centered) / np.outer(safe, safe)
    r[constant, :] = 0.0
    r[:, constant] = 0.0
    np.fill_diagonal(r, 1.0)
    return np.clip(r, -1.0, 1.0), constant


def collinearity_prune(samples, threshold=0.9, names=FEATURES):
    """Drop features until no remaining pair has ``|r| > threshold``.

    At each step the pair with the largest ``|r|`` is resolved by dropping the
    member with the higher mean ``|r|`` against the other remaining features
    (the higher index on a tie). Correlations use the unscaled values.

    Returns:
        Retained feature names in their original order.
    """
    if isinstance(samples, pd.DataFrame):
        X = samples[list(names)].to_numpy(dtype=np.float64)
    else:
        X = np.asarray(samples, dtype=np.float64)
    if X.shape[0] < 2:
        raise ValueError("need at least two samples to compute correlations")
    r, constant = correlation_matrix(X)
    if constant.any():
        warnings.warn(
            f"zero-variance feature(s) {[names[i] for i in np.flatnonzero(constant)]}: "
            "correlation taken as 0",
            DataWarning,
            stacklevel=2,
        )
    a = np.abs(r)
    keep = list(range(len(names)))
    while True:
        sub = a[np.ix_(keep, keep)]
        upper = np.triu(sub, k=1)
        if upper.max(initial=0.0) <= threshold:
            break
        i, j = np.unravel_index(np.argmax(upper), upper.shape)
        fi, fj = keep[i], keep[j]
        # mean |r| against the other remaining features (self term removed)
        mean_i = (a[fi, keep].sum() - 1.0) / (len(keep) - 1)
        mean_j = (a[fj, keep].sum() - 1.0) / (len(keep) - 1)
        drop = fi if mean_i > mean_j else fj
        logger.info(
            "collinearity: |r|=%.4f between %s and %s, dropping %s",
            a[fi, fj], names[fi], names[fj], names[drop],
        )
        keep.remove(drop)
    return [names[k] for k in keep]


def family_prune(names=FEATURES):
    """Keep one representative per measurement family (drop _MIN/_MAX/_RANGE)."""
    return [n for n in names if not n.endswith(FAMILY_SUFFIXES)]


def run_scenarios(
    labeled: pd.DataFrame,
    *,
    seed,
    threshold=0.9,
    forest_factory,
    train_fraction=0.7,
    fit_scaler_on_train=False,
):
    """Train a presence forest on each feature set and report accuracy and MDI.

    Args:
        labeled: prepared samples with ``intensity_class``/``presence`` columns.
        seed: split seed; all scenarios share the same train/test rows.
        threshold: collinearity cut-off for the pruned scenario.
        forest_factory: zero-argument callable returning an unfitted forest
            (the first ensemble variant's hyperparameters and seed).
        train_fraction: share of rows used for training.
        fit_scaler_on_train: fit min-max bounds on the training rows only.

    Returns:
        Three :class:`ImportanceReport` objects in :data:`SCENARIOS` order.
    """
    feature_sets = {
        "full": list(FEATURES),
        "collinearity_pruned": collinearity_prune(labeled, threshold),
        "family_pruned": family_prune(),
    }
    y = labeled["presence"].to_numpy().astype(np.int64)
    train_idx, test_idx = split_indices(len(labeled), seed, train_fraction)
    reports = []
    for name in SCENARIOS:
        cols = feature_sets[name]
        X = labeled[cols].to_numpy(dtype=np.float64)
        scaler = MinMaxScaler().fit(X[train_idx] if fit_scaler_on_train else X)
        X = scaler.transform(X)
        forest = forest_factory().fit(X[train_idx], y[train_idx])
        acc = accuracy_score(y[test_idx], forest.predict(X[test_idx]))
        reports.append(ImportanceReport(name, tuple(cols), mdi_importance(forest), acc))
        logger.info("scenario %s: %d features, accuracy %.5f", name, len(cols), acc)
    return reports


def write_scenario_outputs(reports, out_dir):
    """One ``<scenario>.csv`` (feature, importance, rank) per scenario plus ``summary.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = []
    for rep in reports:
        ranking = rep.ranking()
        rank = {f: i + 1 for i, f in enumerate(ranking)}
        frame = pd.DataFrame(
            {
                "feature": list(rep.features),
                "importance": rep.importances,
                "rank": [rank[f] for f in rep.features],
            }
        ).sort_values("rank", kind="stable")
        frame.to_csv(out_dir / f"{rep.scenario}.csv", index=False, lineterminator="\n")
        summary.append(
            {
                "scenario": rep.scenario,
                "n_features": len(rep.features),
                "accuracy": rep.accuracy,
                "top3": " ".join(rep.top(3)),
                "features": " ".join(rep.features),
            }
        )
    pd.DataFrame(summary).to_csv(out_dir / "summary.csv", index=False, lineterminator="\n")
    return out_dir / "summary.csv"
