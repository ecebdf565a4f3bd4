"""Trailing-window aggregation of daily weather into weekly samples.

Every daily row that carries a score becomes one sample whose features are
the aggregate of the county's days in ``[date - window_days + 1, date]``.
Days missing from the series are skipped, so ``window_len`` counts the days
that were actually present. Windows at the start of a county's record are
shorter than ``window_days`` and are kept.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ParameterError, SchemaError
from .features import FEATURES, SCORE_MAX, SCORE_MIN
from .ingest import DATE_FORMAT, _match_columns, _read_header, check_unique_keys, normalize_fips

SAMPLE_COLUMNS = ("fips", "date", *FEATURES, "score", "window_len")

AGGREGATORS = {
    "mean": lambda block: block.mean(axis=0),
    "min": lambda block: block.min(axis=0),
    "max": lambda block: block.max(axis=0),
    "sum": lambda block: block.sum(axis=0),
}


@dataclass(frozen=True)
class WindowSample:
    fips: str
    date: dt.date
    features: tuple
    score: float
    window_len: int

    def __post_init__(self):
        if not 1 <= self.window_len:
            raise ValueError(f"window_len must be >= 1, got {self.window_len}")
        if not all(math.isfinite(v) for v in self.features):
            raise ValueError("non-finite aggregated feature")
        if not SCORE_MIN <= self.score <= SCORE_MAX:
            raise ValueError(f"score {self.score} outside [{SCORE_MIN}, {SCORE_MAX}]")


def _check_params(window_days, aggregator):
    if isinstance(window_days, bool) or int(window_days) != window_days or window_days < 1:
        raise ParameterError(f"window_days must be an integer >= 1, got {window_days!r}")
    if aggregator not in AGGREGATORS:
        raise ParameterError(f"unknown aggregator {aggregator!r}; choose from {sorted(AGGREGATORS)}")
    return int(window_days), AGGREGATORS[aggregator]


def _aggregate_county(days, feats, targets, window_days, func):
    starts = np.searchsorted(days, days[targets] - (window_days - 1), side="left")
    out = np.empty((len(targets), feats.shape[1]), dtype=np.float64)
    for k, (start, stop) in enumerate(zip(starts, targets + 1)):
        out[k] = func(feats[start:stop])
    return out, (targets + 1 - starts).astype(np.int64)


def aggregate_windows(daily: pd.DataFrame, window_days=90, aggregator="mean", *, scored_only=True):
    """Aggregate trailing windows for scored rows (or every row).

    This is the shared engine behind :func:`build_window_samples`; with
    ``scored_only=False`` it also produces windows for unscored days, which
    is what prediction on raw dailies needs. The ``score`` column is passed
    through (NaN where absent).
    """
    window_days, func = _check_params(window_days, aggregator)
    if len(daily) == 0:
        return empty_sample_frame()
    check_unique_keys(daily)
    daily = daily.sort_values(["fips", "date"], kind="stable", ignore_index=True)

    fips_all = daily["fips"].to_numpy()
    days_all = daily["date"].to_numpy().astype("datetime64[D]").astype(np.int64)
    feats_all = daily[list(FEATURES)].to_numpy(dtype=np.float64)
    score_all = daily["score"].to_numpy(dtype=np.float64)

    # fips is sorted, so each county is one contiguous block
    boundaries = np.flatnonzero(fips_all[1:] != fips_all[:-1]) + 1
    bounds = np.concatenate(([0], boundaries, [len(daily)]))

    parts_feats, parts_len, parts_rows = [], [], []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        score = score_all[lo:hi]
        targets = np.flatnonzero(~np.isnan(score)) if scored_only else np.arange(hi - lo)
        if len(targets) == 0:
            continue
        feats, lens = _aggregate_county(days_all[lo:hi], feats_all[lo:hi], targets, window_days, func)
        parts_feats.append(feats)
        parts_len.append(lens)
        parts_rows.append(targets + lo)

    if not parts_rows:
        return empty_sample_frame()
    rows = np.concatenate(parts_rows)
    feats = np.vstack(parts_feats)
    out = pd.DataFrame(
        {"fips": fips_all[rows], "date": daily["date"].to_numpy()[rows]},
    )
    for j, name in enumerate(FEATURES):
        out[name] = feats[:, j]
    out["score"] = score_all[rows]
    out["window_len"] = np.concatenate(parts_len)
    return out


def build_window_samples(daily: pd.DataFrame, window_days=90, aggregator="mean") -> pd.DataFrame:
    """One sample per scored daily record, ordered by (fips, date).

    Args:
        daily: daily frame as produced by :mod:`droughtcast.ingest`.
        window_days: trailing window length in calendar days, inclusive of the
            score date.
        aggregator: ``"mean"`` (default), ``"min"``, ``"max"`` or ``"sum"``.

    Returns:
        Frame with columns :data:`SAMPLE_COLUMNS`.
    """
    return aggregate_windows(daily, window_days, aggregator, scored_only=True)


def empty_sample_frame():
    frame = pd.DataFrame({c: pd.Series(dtype="float64") for c in SAMPLE_COLUMNS})
    frame["fips"] = frame["fips"].astype(object)
    frame["date"] = pd.to_datetime(frame["date"])
    frame["window_len"] = frame["window_len"].astype(np.int64)
    return frame


def samples_to_records(frame: pd.DataFrame) -> list[WindowSample]:
    feats = frame[list(FEATURES)].to_numpy(dtype=np.float64)
    return [
        WindowSample(f, d.date(), tuple(feats[i].tolist()), float(s), int(w))
        for i, (f, d, s, w) in enumerate(
            zip(frame["fips"], frame["date"], frame["score"], frame["window_len"])
        )
    ]


def write_prepared_csv(samples: pd.DataFrame, path) -> Path:
    """Persist samples as ``fips,date,<18 features>,score,window_len``."""
    if len(samples) == 0:
        raise ValueError("refusing to write an empty prepared dataset")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out = samples[list(SAMPLE_COLUMNS)].copy()
    out["date"] = out["date"].dt.strftime(DATE_FORMAT)
    try:
        out.to_csv(path, index=False, lineterminator="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_prepared_csv(path, *, require_score=True) -> pd.DataFrame:
    """Load a prepared-sample CSV written by :func:`write_prepared_csv`.

    With ``require_score=False`` the ``score`` and ``window_len`` columns may
    be absent (windows prepared for prediction only).
    """
    path = Path(path)
    header = _read_header(path)
    wanted = SAMPLE_COLUMNS if require_score else ("fips", "date", *FEATURES)
    column_map = _match_columns(header, wanted, path)
    dtypes = {column_map["fips"]: str, column_map["date"]: str}
    dtypes.update({column_map[c]: np.float64 for c in FEATURES})
    try:
        frame = pd.read_csv(
            path, dtype=dtypes, keep_default_na=False, na_values=[""], float_precision="round_trip"
        )
    except (OSError, ValueError) as exc:
        raise type(exc)(f"{path}: {exc}") from exc
    frame = frame.rename(columns={v: k for k, v in column_map.items()})
    frame["fips"] = frame["fips"].map(normalize_fips)
    frame["date"] = pd.to_datetime(frame["date"], format=DATE_FORMAT)
    if "score" not in frame:
        frame["score"] = np.nan
    if "window_len" not in frame:
        frame["window_len"] = 0
    frame["score"] = frame["score"].astype(np.float64)
    frame["window_len"] = frame["window_len"].astype(np.int64)
    if require_score and frame["score"].isna().any():
        line = int(np.flatnonzero(frame["score"].isna().to_numpy())[0]) + 2
        raise SchemaError(f"{path}: line {line}: missing score in prepared dataset", column="score")
    return frame[list(SAMPLE_COLUMNS)]
