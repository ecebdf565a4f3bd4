"""Independent reference implementations used as test oracles.

They favour obviousness over speed: exact rational arithmetic, exhaustive
enumeration, all-pairs distances.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from math import sqrt


def exact_gini(counts):
    n = sum(counts)
    return 1 - sum(Fraction(c, n) ** 2 for c in counts)


def all_splits(X, y, rows, features, n_classes, min_samples_leaf=1):
    """Every (feature, threshold, decrease) over midpoints of distinct values."""
    out = []
    parent = [0] * n_classes
    for r in rows:
        parent[y[r]] += 1
    g = exact_gini(parent)
    n = len(rows)
    for f in features:
        values = sorted({Fraction(X[r][f]) for r in rows})
        for lo, hi in zip(values, values[1:]):
            thr = (lo + hi) / 2
            left = [r for r in rows if Fraction(X[r][f]) <= thr]
            right = [r for r in rows if Fraction(X[r][f]) > thr]
            if len(left) < min_samples_leaf or len(right) < min_samples_leaf:
                continue
            cl = [sum(1 for r in left if y[r] == c) for c in range(n_classes)]
            cr = [sum(1 for r in right if y[r] == c) for c in range(n_classes)]
            child = Fraction(len(left), n) * exact_gini(cl) + Fraction(len(right), n) * exact_gini(cr)
            out.append((f, thr, g - child))
    return out


def oracle_best_split(X, y, rows, features, n_classes, min_samples_leaf=1):
    """Largest decrease; ties to lowest feature then smallest threshold."""
    candidates = [s for s in all_splits(X, y, rows, features, n_classes, min_samples_leaf) if s[2] > 0]
    if not candidates:
        return None
    best = max(s[2] for s in candidates)
    return min((s for s in candidates if s[2] == best), key=lambda s: (s[0], s[1]))


def oracle_tree(X, y, n_classes, max_depth=None, min_samples_leaf=1, mtry=None, rng=None):
    """Recursive CART; returns a nested tuple structure.

    ``("leaf", counts)`` or ``("split", feature, threshold, left, right)``.
    When ``mtry`` is below the feature count, candidate features are drawn
    from ``rng`` at each node in depth-first, left-first order.
    """
    d = len(X[0])

    def grow(rows, depth):
        counts = [sum(1 for r in rows if y[r] == c) for c in range(n_classes)]
        if max(counts) == len(rows) or (max_depth is not None and depth >= max_depth):
            return ("leaf", counts)
        if len(rows) < 2 * min_samples_leaf:
            return ("leaf", counts)
        if mtry is not None and mtry < d:
            features = sorted(int(f) for f in rng.choice(d, size=mtry, replace=False))
        else:
            features = range(d)
        split = oracle_best_split(X, y, rows, features, n_classes, min_samples_leaf)
        if split is None:
            return ("leaf", counts)
        f, thr, _ = split
        left = [r for r in rows if Fraction(X[r][f]) <= thr]
        right = [r for r in rows if Fraction(X[r][f]) > thr]
        return ("split", f, thr, grow(left, depth + 1), grow(right, depth + 1))

    return grow(list(range(len(y))), 0)


def oracle_proba(node, x):
    while node[0] == "split":
        _, f, thr, left, right = node
        node = left if Fraction(x[f]) <= thr else right
    counts = node[1]
    n = sum(counts)
    return [Fraction(c, n) for c in counts]


def oracle_knn(train_X, train_y, query, k):
    """All-pairs Euclidean k-NN; ties by row index, vote ties to the lowest class."""
    dist = [(sqrt(sum((a - b) ** 2 for a, b in zip(row, query))), i) for i, row in enumerate(train_X)]
    dist.sort()
    votes = Counter(train_y[i] for _, i in dist[:k])
    top = max(votes.values())
    return min(c for c, v in votes.items() if v == top)


def hand_report(truth, pred, classes):
    """Per-class precision, recall, f1 and support by direct counting."""
    rows = {}
    for c in classes:
        tp = sum(1 for t, p in zip(truth, pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(truth, pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(truth, pred) if t == c and p != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        rows[c] = (prec, rec, f1, tp + fn)
    return rows
