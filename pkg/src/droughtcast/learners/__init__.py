"""From-scratch tree learners and the ensembles built on them."""

from .baselines import KNeighborsClassifier, LogisticRegression, knn_predict
from .ensemble import SoftVotingClassifier
from .forest import RandomForestClassifier
from .multiclass import OneVsRestClassifier
from .tree import (
    DecisionTreeClassifier,
    InternalNode,
    LeafNode,
    Split,
    Tree,
    best_split,
    fit_tree,
    gini,
)

__all__ = [
    "DecisionTreeClassifier",
    "InternalNode",
    "KNeighborsClassifier",
    "LeafNode",
    "LogisticRegression",
    "OneVsRestClassifier",
    "RandomForestClassifier",
    "SoftVotingClassifier",
    "Split",
    "Tree",
    "best_split",
    "fit_tree",
    "gini",
    "knn_predict",
]
