"""Shared fixtures: a small synthetic dataset in the Kaggle file layout."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from droughtcast.features import FEATURES
from droughtcast.ingest import DAILY_COLUMNS

CA_COUNTIES = {"06001": "Alameda", "06003": "Alpine", "06005": "Amador", "06007": "Butte"}
NV_COUNTIES = {"32001": "Churchill", "32003": "Clark"}
COORDS = {
    "06001": (37.65, -121.92),
    "06003": (38.60, -119.82),
    "06005": (38.45, -120.65),
    "06007": (39.67, -121.60),
    "32001": (39.58, -118.34),
    "32003": (36.21, -115.01),
}
SPLIT_YEARS = {"train": (2011, 2014), "validation": (2015, 2015), "test": (2016, 2017)}


def synthetic_daily(fips_codes, start="2011-01-01", end="2017-12-31", seed=0):
    """Daily frame whose weekly score follows a slow drought cycle.

    Precipitation and humidity fall as the score rises, so the windowed
    features carry signal. Every score class appears in each county.
    """
    rng = np.random.default_rng(seed)
    dates = pd.date_range(start, end, freq="D")
    t = np.arange(len(dates))
    frames = []
    for k, fips in enumerate(fips_codes):
        phase = 0.7 * k
        cycle = 2.5 + 2.6 * np.sin(2 * np.pi * t / 540.0 + phase)
        data = {"fips": fips, "date": dates}
        base = rng.normal(size=(len(dates), len(FEATURES)))
        for j, name in enumerate(FEATURES):
            data[name] = np.round(10.0 + 0.5 * j + base[:, j], 3)
        data["PRECTOT"] = np.round(np.clip(4.0 - 0.7 * cycle + rng.normal(0, 0.8, len(t)), 0, None), 3)
        data["QV2M"] = np.round(9.0 - 0.6 * cycle + rng.normal(0, 0.5, len(t)), 3)
        data["PS"] = np.round(100.0 + 0.1 * cycle + rng.normal(0, 0.05, len(t)), 3)
        score = np.clip(cycle + rng.normal(0, 0.3, len(t)), 0.0, 5.0).round(4)
        weekly = (t % 7) == 3
        data["score"] = np.where(weekly, score, np.nan)
        frames.append(pd.DataFrame(data))
    frame = pd.concat(frames, ignore_index=True)
    return frame[list(DAILY_COLUMNS)]


def write_daily_csv(frame, path):
    out = frame.copy()
    out["date"] = out["date"].dt.strftime("%Y-%m-%d")
    out.to_csv(path, index=False, na_rep="", lineterminator="\n")
    return Path(path)


def write_dataset(root):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    daily = synthetic_daily([*CA_COUNTIES, *NV_COUNTIES])
    years = daily["date"].dt.year
    paths = {}
    for split, (a, b) in SPLIT_YEARS.items():
        paths[split] = write_daily_csv(daily[(years >= a) & (years <= b)], root / f"{split}_timeseries.csv")
    registry = [(f, n, "CA") for f, n in CA_COUNTIES.items()] + [(f, n, "NV") for f, n in NV_COUNTIES.items()]
    pd.DataFrame(registry, columns=["FIPS", "Name", "State"]).to_csv(root / "fips.csv", index=False)
    paths["fips"] = root / "fips.csv"
    soil = pd.DataFrame(
        [(f, lat, lon, 0.1, 0.2) for f, (lat, lon) in COORDS.items()],
        columns=["fips", "lat", "lon", "elevation", "slope1"],
    )
    soil.to_csv(root / "soil_data.csv", index=False)
    paths["soil"] = root / "soil_data.csv"
    return paths


@pytest.fixture(scope="session")
def dataset(tmp_path_factory):
    return write_dataset(tmp_path_factory.mktemp("synthetic"))


@pytest.fixture(scope="session")
def prepared_csv(dataset, tmp_path_factory):
    from droughtcast import pipeline

    cfg = pipeline.load_config(
        overrides={k: str(dataset[k]) for k in ("train", "validation", "test", "fips")}, environ={}
    )
    out = tmp_path_factory.mktemp("prepared") / "prepared.csv"
    pipeline.prepare(cfg, out)
    return out


def real_data_dir():
    """Directory holding the public drought dataset, if configured."""
    value = os.environ.get("DROUGHTCAST_DATA_DIR")
    if not value:
        return None
    path = Path(value)
    return path if path.is_dir() else None


# "criterion N: PASS|FAIL|SKIP detail" lines collected by the acceptance suite
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
