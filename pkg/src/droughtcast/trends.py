"""Yearly label frequencies and county-level changes between periods."""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataWarning
from .features import LABEL_DESCRIPTIONS, LABELS, label_to_class

logger = logging.getLogger(__name__)

# (period A, period B), calendar years inclusive
PERIOD_SCENARIOS = {
    1: ((2000, 2013), (2014, 2020)),
    2: ((2007, 2013), (2014, 2020)),
}


@dataclass(frozen=True)
class CountyTrend:
    fips: str
    label: str
    pct_a: float
    pct_b: float

    @property
    def delta(self):
        return self.pct_b - self.pct_a


@dataclass(frozen=True)
class ChangeSummary:
    label: str
    period_a: tuple
    period_b: tuple
    trends: tuple
    n_positive: int
    n_negative: int
    n_zero: int

    def line(self):
        return f"positive={self.n_positive} negative={self.n_negative} zero={self.n_zero}"


def _years(labeled):
    return labeled["date"].dt.year.to_numpy()


def yearly_counts(labeled: pd.DataFrame) -> pd.DataFrame:
    """Occurrences of each label per calendar year of the sample date.

    Returns a frame indexed by year with one integer column per label
    (``0, D0 .. D4``).
    """
    years = _years(labeled)
    classes = labeled["intensity_class"].to_numpy()
    all_years = np.unique(years)
    counts = np.zeros((len(all_years), len(LABELS)), dtype=np.int64)
    np.add.at(counts, (np.searchsorted(all_years, years), classes), 1)
    frame = pd.DataFrame(counts, index=pd.Index(all_years, name="year"), columns=list(LABELS))
    return frame


def _period_mask(years, period):
    lo, hi = period
    return (years >= lo) & (years <= hi)


def period_percentages(labeled: pd.DataFrame, fips, period):
    """Share (in percent) of each of the six labels for one county and period.

    Returns ``None`` with a :class:`DataWarning` when the county has no sample
    in the period.
    """
    mask = (labeled["fips"].to_numpy() == fips) & _period_mask(_years(labeled), period)
    classes = labeled["intensity_class"].to_numpy()[mask]
    if classes.size == 0:
        warnings.warn(f"county {fips} has no samples in {period[0]}-{period[1]}", DataWarning, stacklevel=2)
        return None
    counts = np.bincount(classes, minlength=len(LABELS)).astype(np.float64)
    return 100.0 * counts / classes.size


def _all_percentages(labeled, period):
    """fips -> six-label percentage vector, for every county with data in ``period``."""
    mask = _period_mask(_years(labeled), period)
    sub = labeled.loc[mask, ["fips", "intensity_class"]]
    table = pd.crosstab(sub["fips"], sub["intensity_class"]).reindex(
        columns=range(len(LABELS)), fill_value=0
    )
    totals = table.sum(axis=1).to_numpy(dtype=np.float64)
    pct = 100.0 * table.to_numpy(dtype=np.float64) / totals[:, None]
    return dict(zip(table.index, pct))


def change_summary(labeled: pd.DataFrame, label, period_a, period_b, counties=None) -> ChangeSummary:
    """Percentage-point change of ``label`` between two periods, per county.

    Counties missing from either period are skipped with a warning. A
    county counts as positive/negative on a strict sign of the delta and
    as zero otherwise.
    """
    k = label_to_class(label)
    name = LABELS[k]
    pct_a = _all_percentages(labeled, period_a)
    pct_b = _all_percentages(labeled, period_b)
    if counties is None:
        counties = sorted(set(labeled["fips"]))
    trends = []
    for fips in sorted(counties):
        if fips not in pct_a or fips not in pct_b:
            missing = period_a if fips not in pct_a else period_b
            warnings.warn(
                f"county {fips} has no samples in {missing[0]}-{missing[1]}; skipped",
                DataWarning,
                stacklevel=2,
            )
            continue
        trends.append(CountyTrend(fips, name, float(pct_a[fips][k]), float(pct_b[fips][k])))
    deltas = np.array([t.delta for t in trends])
    return ChangeSummary(
        name,
        tuple(period_a),
        tuple(period_b),
        tuple(trends),
        int((deltas > 0).sum()),
        int((deltas < 0).sum()),
        int((deltas == 0).sum()),
    )


def scenario_summary(labeled, label, scenario):
    period_a, period_b = PERIOD_SCENARIOS[int(scenario)]
    return change_summary(labeled, label, period_a, period_b)


def trends_frame(summary: ChangeSummary, names=None) -> pd.DataFrame:
    names = names or {}
    return pd.DataFrame(
        {
            "fips": [t.fips for t in summary.trends],
            "name": [names.get(t.fips, "") for t in summary.trends],
            "label": [t.label for t in summary.trends],
            "pct_a": [t.pct_a for t in summary.trends],
            "pct_b": [t.pct_b for t in summary.trends],
            "delta": [t.delta for t in summary.trends],
        }
    )


def write_trends_csv(summary: ChangeSummary, path, names=None):
    trends_frame(summary, names).to_csv(path, index=False, lineterminator="\n")
    return Path(path)


def emit_map_data(summary: ChangeSummary, coords, names=None, path=None):
    """Bubble-map data as a GeoJSON FeatureCollection of county points.

    Each feature carries ``fips, name, label, pct_a, pct_b, delta`` plus
    ``magnitude = |delta|`` (bubble size) and ``sign`` (-1, 0, 1; bubble
    colour). Counties without coordinates are skipped with one warning.
    """
    names = names or {}
    features = []
    missing = []
    for t in summary.trends:
        c = coords.get(t.fips)
        if c is None:
            missing.append(t.fips)
            continue
        delta = t.delta
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [c.longitude, c.latitude]},
                "properties": {
                    "fips": t.fips,
                    "name": names.get(t.fips, ""),
                    "label": t.label,
                    "label_description": LABEL_DESCRIPTIONS[t.label],
                    "pct_a": t.pct_a,
                    "pct_b": t.pct_b,
                    "delta": delta,
                    "magnitude": abs(delta),
                    "sign": int(np.sign(delta)),
                },
            }
        )
    if missing:
        warnings.warn(
            f"{len(missing)} county(ies) without coordinates skipped: {missing[:5]}",
            DataWarning,
            stacklevel=2,
        )
    collection = {
        "type": "FeatureCollection",
        "properties": {
            "label": summary.label,
            "period_a": list(summary.period_a),
            "period_b": list(summary.period_b),
            "n_positive": summary.n_positive,
            "n_negative": summary.n_negative,
            "n_zero": summary.n_zero,
        },
        "features": features,
    }
    if path is not None:
        try:
            Path(path).write_text(json.dumps(collection, indent=1) + "\n", encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
    return collection
