"""Reading the raw timeseries, FIPS registry and soil coordinate files.

Daily records travel through the pipeline as a :class:`pandas.DataFrame` with
the columns ``fips, date, <FEATURES...>, score`` (see :data:`DAILY_COLUMNS`):

* ``fips`` is a zero-padded 5 character string,
* ``date`` is ``datetime64[ns]`` at day resolution,
* feature columns are ``float64``,
* ``score`` is ``float64`` with ``NaN`` where no weekly reading exists.

:class:`DailyRecord` and friends are the row-level view of the same data, for
callers that want plain objects.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .errors import DataWarning, DuplicateKeyError, RowError, SchemaError
from .features import FEATURES, SCORE_MAX, SCORE_MIN

logger = logging.getLogger(__name__)

DAILY_COLUMNS = ("fips", "date", *FEATURES, "score")
DATE_FORMAT = "%Y-%m-%d"

_FIPS_RE = re.compile(r"^[0-9]{1,5}$")
_STATE_RE = re.compile(r"^[A-Z]{2}$")
_CHUNK_ROWS = 1_000_000


@dataclass(frozen=True)
class FipsEntry:
    fips: str
    name: str
    state: str

    def __post_init__(self):
        if not re.fullmatch(r"[0-9]{5}", self.fips):
            raise ValueError(f"fips must be 5 digits, got {self.fips!r}")
        if not _STATE_RE.match(self.state):
            raise ValueError(f"state must be 2 uppercase letters, got {self.state!r}")


@dataclass(frozen=True)
class DailyRecord:
    fips: str
    date: dt.date
    features: tuple
    score: float | None = None

    def __post_init__(self):
        if len(self.features) != len(FEATURES):
            raise ValueError(f"expected {len(FEATURES)} features, got {len(self.features)}")
        if not all(math.isfinite(v) for v in self.features):
            raise ValueError(f"non-finite feature value in record {self.fips} {self.date}")
        if self.score is not None and not SCORE_MIN <= self.score <= SCORE_MAX:
            raise ValueError(f"score {self.score} outside [{SCORE_MIN}, {SCORE_MAX}]")


@dataclass(frozen=True)
class CountyCoord:
    fips: str
    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")


def normalize_fips(value):
    """Zero-pad a county code to 5 characters; raise ``ValueError`` if it is not numeric."""
    text = str(value).strip()
    if text.endswith(".0"):
        # integer codes that went through a float column
        text = text[:-2]
    if not _FIPS_RE.match(text):
        raise ValueError(f"invalid fips code {value!r}")
    return text.zfill(5)


def empty_daily_frame():
    frame = pd.DataFrame({c: pd.Series(dtype="float64") for c in DAILY_COLUMNS})
    frame["fips"] = frame["fips"].astype(object)
    frame["date"] = pd.to_datetime(frame["date"])
    return frame[list(DAILY_COLUMNS)]


def records_to_frame(records: Iterable[DailyRecord]) -> pd.DataFrame:
    records = list(records)
    if not records:
        return empty_daily_frame()
    data = {
        "fips": [r.fips for r in records],
        "date": pd.to_datetime([r.date for r in records]),
    }
    feats = np.array([r.features for r in records], dtype=np.float64)
    for j, name in enumerate(FEATURES):
        data[name] = feats[:, j]
    data["score"] = np.array([np.nan if r.score is None else r.score for r in records])
    return pd.DataFrame(data, columns=list(DAILY_COLUMNS))


def frame_to_records(frame: pd.DataFrame) -> list[DailyRecord]:
    feats = frame[list(FEATURES)].to_numpy(dtype=np.float64)
    scores = frame["score"].to_numpy(dtype=np.float64)
    out = []
    for i, (fips, date) in enumerate(zip(frame["fips"], frame["date"])):
        score = None if np.isnan(scores[i]) else float(scores[i])
        out.append(DailyRecord(fips, date.date(), tuple(feats[i].tolist()), score))
    return out


def _read_header(path):
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), None)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    if not header:
        raise SchemaError(f"{path}: empty file, header row required")
    return [h.strip() for h in header]


def _match_columns(header, wanted, path, aliases=None):
    """Map each wanted column to the header name present in the file.

    Matching is case-insensitive; ``aliases`` maps a wanted name to extra
    accepted spellings. Raises :class:`SchemaError` naming the first missing
    column.
    """
    lower = {h.lower(): h for h in header}
    aliases = aliases or {}
    found = {}
    for name in wanted:
        for candidate in (name, *aliases.get(name, ())):
            if candidate.lower() in lower:
                found[name] = lower[candidate.lower()]
                break
        else:
            raise SchemaError(f"{path}: missing column {name}", column=name)
    extra = [h for h in header if h not in found.values()]
    if extra:
        shown = ", ".join(extra[:5]) + (", ..." if len(extra) > 5 else "")
        logger.warning("%s: ignoring %d extra column(s): %s", path, len(extra), shown)
    return found


def _locate_bad_value(path, column_map, numeric_columns):
    """Slow exact scan used only after the fast parser rejected a file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for line, row in enumerate(reader, start=2):
            for name in numeric_columns:
                raw = (row.get(column_map[name]) or "").strip()
                if raw == "":
                    continue
                try:
                    float(raw)
                except ValueError:
                    raise RowError(f"unparseable number {raw!r} in column {name}", line, path)
    raise RowError("unparseable value", path=path)


def _check_frame(frame, path, line_offset, strict):
    """Validate a freshly parsed chunk in place; returns the (possibly filtered) chunk."""
    line_no = frame.index.to_numpy() + line_offset

    fips_raw = frame["fips"].astype(str)
    uniques = pd.unique(fips_raw)
    mapping = {}
    for u in uniques:
        try:
            mapping[u] = normalize_fips(u)
        except ValueError:
            bad = int(line_no[np.flatnonzero(fips_raw.to_numpy() == u)[0]])
            raise RowError(f"invalid fips code {u!r}", bad, path) from None
    frame["fips"] = fips_raw.map(mapping).astype(object)

    date_raw = frame["date"].astype(str)
    uniq_dates = pd.unique(date_raw)
    parsed = pd.to_datetime(pd.Series(uniq_dates), format=DATE_FORMAT, errors="coerce")
    if parsed.isna().any():
        u = uniq_dates[int(np.flatnonzero(parsed.isna().to_numpy())[0])]
        bad = int(line_no[np.flatnonzero(date_raw.to_numpy() == u)[0]])
        raise RowError(f"unparseable date {u!r} (expected YYYY-MM-DD)", bad, path)
    frame["date"] = date_raw.map(dict(zip(uniq_dates, parsed))).astype("datetime64[ns]")

    feats = frame[list(FEATURES)].to_numpy(dtype=np.float64)
    bad_rows = ~np.isfinite(feats).all(axis=1)
    if bad_rows.any():
        first = int(np.flatnonzero(bad_rows)[0])
        col = FEATURES[int(np.flatnonzero(~np.isfinite(feats[first]))[0])]
        if strict:
            raise RowError(f"missing or non-finite value in column {col}", int(line_no[first]), path)
        warnings.warn(
            f"{path}: dropped {int(bad_rows.sum())} row(s) with missing feature values "
            f"(first at line {int(line_no[first])})",
            DataWarning,
            stacklevel=3,
        )
        frame = frame.loc[~bad_rows]

    score = frame["score"].to_numpy(dtype=np.float64)
    out_of_range = ~np.isnan(score) & ((score < SCORE_MIN) | (score > SCORE_MAX))
    if out_of_range.any():
        first = int(np.flatnonzero(out_of_range)[0])
        raise RowError(
            f"score {score[first]} outside [{SCORE_MIN}, {SCORE_MAX}]",
            int(frame.index[first] + line_offset),
            path,
        )
    return frame


def check_unique_keys(frame):
    """Raise :class:`DuplicateKeyError` for the first repeated (fips, date)."""
    dup = frame.duplicated(subset=["fips", "date"], keep="first")
    if dup.any():
        row = frame.loc[dup].iloc[0]
        raise DuplicateKeyError(row["fips"], row["date"].strftime(DATE_FORMAT))


def parse_timeseries_csv(path, *, strict=True, keep_fips=None, require_score=True) -> pd.DataFrame:
    """Parse one timeseries split into a daily frame.

    Args:
        path: CSV with a header containing ``fips``, ``date``, the 18 feature
            columns and ``score``. Extra columns are ignored with a warning.
        strict: When true (default) a row with a missing feature value is an
            error; otherwise such rows are dropped with a :class:`DataWarning`.
        keep_fips: Optional collection of 5-digit codes. Rows of other counties
            are discarded while reading, which keeps memory bounded on the
            nationwide files.
        require_score: When false a file without a ``score`` column is
            accepted and every score is absent.

    Returns:
        Daily frame in file order.

    Raises:
        SchemaError: a required column is missing.
        RowError: unparseable number/date or out-of-range score (with line).
        DuplicateKeyError: a (fips, date) pair occurs twice.
    """
    path = Path(path)
    header = _read_header(path)
    has_score = require_score or "score" in {h.lower() for h in header}
    wanted = DAILY_COLUMNS if has_score else DAILY_COLUMNS[:-1]
    column_map = _match_columns(header, wanted, path)
    numeric = [*FEATURES, "score"] if has_score else list(FEATURES)
    dtypes = {column_map["fips"]: str, column_map["date"]: str}
    dtypes.update({column_map[c]: np.float64 for c in numeric})
    keep = None if keep_fips is None else {normalize_fips(f) for f in keep_fips}

    chunks = []
    try:
        reader = pd.read_csv(
            path,
            usecols=[column_map[c] for c in wanted],
            dtype=dtypes,
            keep_default_na=False,
            na_values=[""],
            chunksize=_CHUNK_ROWS,
            float_precision="round_trip",
            encoding="utf-8",
        )
        offset = 0
        for chunk in reader:
            chunk = chunk.rename(columns={v: k for k, v in column_map.items()})
            if not has_score:
                chunk["score"] = np.nan
            chunk.index = pd.RangeIndex(offset, offset + len(chunk))
            offset += len(chunk)
            if keep is not None:
                padded = chunk["fips"].astype(str).str.strip().str.removesuffix(".0").str.zfill(5)
                chunk = chunk.loc[padded.isin(keep).to_numpy()]
                if chunk.empty:
                    continue
            chunks.append(_check_frame(chunk[list(DAILY_COLUMNS)].copy(), path, 2, strict))
    except ValueError as exc:
        if isinstance(exc, (RowError, SchemaError)):
            raise
        _locate_bad_value(path, column_map, numeric)

    if not chunks:
        return empty_daily_frame()
    frame = pd.concat(chunks, ignore_index=True)
    check_unique_keys(frame)
    return frame


def write_timeseries_csv(frame: pd.DataFrame, path) -> Path:
    """Write a daily frame in the input format (lossless for float64 values)."""
    path = Path(path)
    out = frame[list(DAILY_COLUMNS)].copy()
    out["date"] = out["date"].dt.strftime(DATE_FORMAT)
    out.to_csv(path, index=False, na_rep="", lineterminator="\n")
    return path


def merge_splits(*splits: pd.DataFrame) -> pd.DataFrame:
    """Concatenate disjoint splits and sort stably by fips, then date.

    Raises:
        DuplicateKeyError: a (fips, date) key is present in more than one split.
    """
    parts = [s for s in splits if len(s)]
    if not parts:
        return empty_daily_frame()
    frame = pd.concat([p[list(DAILY_COLUMNS)] for p in parts], ignore_index=True)
    check_unique_keys(frame)
    frame = frame.sort_values(["fips", "date"], kind="stable", ignore_index=True)
    return frame


def parse_fips_registry(path) -> pd.DataFrame:
    """Read the county registry (columns FIPS, Name, State) into a frame.

    The returned frame has lowercase columns ``fips, name, state``.
    """
    path = Path(path)
    header = _read_header(path)
    column_map = _match_columns(header, ("FIPS", "Name", "State"), path)
    raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    rows = []
    for line, values in enumerate(raw.to_dict("records"), start=2):
        try:
            fips = normalize_fips(values[column_map["FIPS"]])
        except ValueError as exc:
            raise RowError(str(exc), line, path) from None
        state = values[column_map["State"]].strip().upper()
        if not _STATE_RE.match(state):
            raise RowError(f"invalid state code {state!r}", line, path)
        rows.append((fips, values[column_map["Name"]].strip(), state))
    registry = pd.DataFrame(rows, columns=["fips", "name", "state"])
    if registry["fips"].duplicated().any():
        dups = registry.loc[registry["fips"].duplicated(), "fips"].tolist()
        warnings.warn(f"{path}: duplicate FIPS rows {dups[:5]}; last one wins", DataWarning, stacklevel=2)
        registry = registry.drop_duplicates("fips", keep="last").reset_index(drop=True)
    return registry


def registry_from_entries(entries: Sequence[FipsEntry]) -> pd.DataFrame:
    return pd.DataFrame(
        [(e.fips, e.name, e.state) for e in entries], columns=["fips", "name", "state"]
    )


def filter_state(records: pd.DataFrame, registry: pd.DataFrame, state: str) -> pd.DataFrame:
    """Keep the records of counties that the registry places in ``state``.

    Records whose fips is absent from the registry are dropped and reported
    with one :class:`DataWarning` carrying the count.
    """
    if len(registry) == 0:
        raise ValueError("registry is empty")
    state = state.upper()
    known = records["fips"].isin(registry["fips"])
    n_unknown = int((~known).sum())
    if n_unknown:
        missing = sorted(set(records.loc[~known, "fips"]))
        warnings.warn(
            f"dropped {n_unknown} record(s) with fips absent from registry: {missing[:5]}",
            DataWarning,
            stacklevel=2,
        )
    in_state = set(registry.loc[registry["state"] == state, "fips"])
    mask = records["fips"].isin(in_state)
    return records.loc[mask].reset_index(drop=True)


def parse_soil_coords(path) -> dict[str, CountyCoord]:
    """Read county coordinates from the soil file; soil attributes are ignored.

    Duplicate fips rows resolve last-wins with a :class:`DataWarning`.
    """
    path = Path(path)
    header = _read_header(path)
    column_map = _match_columns(
        header,
        ("fips", "lat", "lon"),
        path,
        aliases={"lat": ("latitude",), "lon": ("longitude", "long")},
    )
    coords: dict[str, CountyCoord] = {}
    duplicates = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for line, row in enumerate(reader, start=2):
            try:
                fips = normalize_fips(row[column_map["fips"]])
                coord = CountyCoord(
                    fips, float(row[column_map["lat"]]), float(row[column_map["lon"]])
                )
            except (TypeError, ValueError) as exc:
                raise RowError(f"malformed coordinate row: {exc}", line, path) from None
            if fips in coords:
                duplicates.append(fips)
            coords[fips] = coord
    if duplicates:
        warnings.warn(
            f"{path}: {len(duplicates)} duplicate fips row(s) {duplicates[:5]}; last one wins",
            DataWarning,
            stacklevel=2,
        )
    return coords
