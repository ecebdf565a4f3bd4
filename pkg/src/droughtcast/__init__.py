"""Drought presence and intensity prediction for US counties.

Daily meteorological records are aggregated over trailing 90-day windows,
labelled from weekly drought scores and fed to soft-voting ensembles of
from-scratch random forests.
"""

__version__ = "0.1.0"

from .features import FEATURES, LABELS
from .ingest import (
    CountyCoord,
    DailyRecord,
    FipsEntry,
    filter_state,
    merge_splits,
    parse_fips_registry,
    parse_soil_coords,
    parse_timeseries_csv,
)
from .learners import (
    DecisionTreeClassifier,
    KNeighborsClassifier,
    LogisticRegression,
    OneVsRestClassifier,
    RandomForestClassifier,
    SoftVotingClassifier,
)
from .metrics import ClassReport, class_report, confusion_matrix, render_report
from .preprocess import MinMaxScaler, discretize_score, split_70_30
from .window import WindowSample, build_window_samples, read_prepared_csv, write_prepared_csv

__all__ = [
    "FEATURES",
    "LABELS",
    "ClassReport",
    "CountyCoord",
    "DailyRecord",
    "DecisionTreeClassifier",
    "FipsEntry",
    "KNeighborsClassifier",
    "LogisticRegression",
    "MinMaxScaler",
    "OneVsRestClassifier",
    "RandomForestClassifier",
    "SoftVotingClassifier",
    "WindowSample",
    "build_window_samples",
    "class_report",
    "confusion_matrix",
    "discretize_score",
    "filter_state",
    "merge_splits",
    "parse_fips_registry",
    "parse_soil_coords",
    "parse_timeseries_csv",
    "read_prepared_csv",
    "render_report",
    "split_70_30",
    "write_prepared_csv",
]
