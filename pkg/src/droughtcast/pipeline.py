"""End-to-end runs: prepare, train, evaluate, predict, importance, trends.

Every step is a function of a :class:`RunConfig` and input files; all
randomness is derived from ``RunConfig.seed``.
"""

from __future__ import annotations

import configparser
import dataclasses
import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ParameterError, SchemaError
from .features import FEATURES
from .importance import run_scenarios, write_scenario_outputs
from .ingest import (
    _read_header,
    filter_state,
    merge_splits,
    parse_fips_registry,
    parse_soil_coords,
    parse_timeseries_csv,
)
from .learners import OneVsRestClassifier, RandomForestClassifier, SoftVotingClassifier
from .learners._seeding import child_seed
from .metrics import class_report, render_report, reports_to_csv
from .persist import load_model, save_model
from .preprocess import (
    DEFAULT_SEED,
    MinMaxScaler,
    feature_matrix,
    label_samples,
    split_indices,
    task_subset,
)
from .trends import PERIOD_SCENARIOS, change_summary, emit_map_data, write_trends_csv, yearly_counts
from .window import aggregate_windows, build_window_samples, read_prepared_csv, write_prepared_csv

logger = logging.getLogger(__name__)

ENV_PREFIX = "DROUGHTCAST_"
CONFIG_SECTION = "droughtcast"
MODEL_SUFFIX = ".dcmodel"
TASKS = ("presence", "intensity")


@dataclass
class RunConfig:
    train: str | None = None
    validation: str | None = None
    test: str | None = None
    fips: str | None = None
    soil: str | None = None
    state: str = "CA"
    window_days: int = 90
    aggregator: str = "mean"
    seed: int = DEFAULT_SEED
    test_fraction: float = 0.3
    n_estimators: tuple = (100, 200, 300)
    max_features: str = "sqrt"
    min_samples_leaf: int = 1
    max_depth: int | None = None
    collinearity_threshold: float = 0.9
    fit_scaler_on_train: bool = False
    present_only: bool = False
    n_jobs: int = 1
    out_dir: str = "runs"
    strict: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not 0.0 < float(self.test_fraction) < 1.0:
            raise ParameterError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if int(self.window_days) < 1:
            raise ParameterError(f"window_days must be >= 1, got {self.window_days}")
        if not self.n_estimators or any(int(n) < 1 for n in self.n_estimators):
            raise ParameterError(f"n_estimators must all be >= 1, got {self.n_estimators}")
        if len(self.n_estimators) < 2:
            raise ParameterError("need at least two forest variants for the voting ensemble")

    @property
    def train_fraction(self):
        return Fraction(1) - Fraction(str(self.test_fraction))

    def forest_params(self):
        max_features = self.max_features
        if isinstance(max_features, str) and max_features.isdigit():
            max_features = int(max_features)
        return {
            "max_features": None if max_features in ("all", "none", "None") else max_features,
            "min_samples_leaf": int(self.min_samples_leaf),
            "max_depth": None if self.max_depth in (None, "", "none") else int(self.max_depth),
        }

    def as_dict(self):
        return dataclasses.asdict(self)


def _coerce(name, raw):
    """Convert a config/env string to the type of ``RunConfig.<name>``."""
    default = {f.name: f.default for f in dataclasses.fields(RunConfig)}[name]
    if isinstance(raw, str):
        text = raw.strip()
        if name == "n_estimators":
            return tuple(int(v) for v in text.replace(",", " ").split())
        if name == "max_depth":
            return None if text.lower() in ("", "none") else int(text)
        if isinstance(default, bool):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ParameterError(f"{name}: expected a boolean, got {raw!r}")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        return text
    return raw


def load_config(path=None, overrides=None, environ=None) -> RunConfig:
    """Defaults < config file < ``DROUGHTCAST_*`` environment < ``overrides``.

    The config file is INI-style with a ``[droughtcast]`` section of
    ``key = value`` lines; keys are :class:`RunConfig` field names (dashes
    allowed).
    """
    names = {f.name for f in dataclasses.fields(RunConfig)}
    values = {}
    if path is not None:
        parser = configparser.ConfigParser()
        if not parser.read(path, encoding="utf-8"):
            raise ParameterError(f"cannot read config file {path}")
        if parser.has_section(CONFIG_SECTION):
            for key, raw in parser.items(CONFIG_SECTION):
                key = key.replace("-", "_")
                if key not in names:
                    raise ParameterError(f"{path}: unknown config key {key!r}")
                values[key] = _coerce(key, raw)
    environ = os.environ if environ is None else environ
    for key in names:
        raw = environ.get(ENV_PREFIX + key.upper())
        if raw is not None:
            values[key] = _coerce(key, raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _coerce(key, value)
    return RunConfig(**values)


# -- prepare ---------------------------------------------------------------------------


def prepare(cfg: RunConfig, out_path=None):
    """Merge the three splits, keep ``cfg.state`` and aggregate windows.

    Returns the sample frame; writes it to ``out_path`` when given.
    """
    for key in ("train", "validation", "test", "fips"):
        if getattr(cfg, key) is None:
            raise ParameterError(f"missing input path: {key}")
    registry = parse_fips_registry(cfg.fips)
    state_fips = registry.loc[registry["state"] == cfg.state.upper(), "fips"]
    if state_fips.empty:
        raise ParameterError(f"registry has no county in state {cfg.state!r}")
    splits = [
        parse_timeseries_csv(getattr(cfg, key), strict=cfg.strict, keep_fips=set(state_fips))
        for key in ("train", "validation", "test")
    ]
    for key, frame in zip(("train", "validation", "test"), splits):
        logger.info("%s: %d daily rows", key, len(frame))
    merged = merge_splits(*splits)
    daily = filter_state(merged, registry, cfg.state)
    logger.info("%d daily rows across %d counties in %s", len(daily), daily["fips"].nunique(), cfg.state)
    samples = build_window_samples(daily, cfg.window_days, cfg.aggregator)
    if out_path is not None:
        write_prepared_csv(samples, out_path)
    return samples


# -- train / evaluate ------------------------------------------------------------------


def _design(samples: pd.DataFrame, cfg: RunConfig, task: str):
    """Labels, scaler, task rows and split shared by training and evaluation."""
    labeled = label_samples(samples)
    rows, y = task_subset(labeled, task)
    train_idx, test_idx = split_indices(len(rows), cfg.seed, cfg.train_fraction)
    X_rows = feature_matrix(rows)
    scaler = MinMaxScaler().fit(X_rows[train_idx] if cfg.fit_scaler_on_train else feature_matrix(labeled))
    return rows, scaler.transform(X_rows), y, train_idx, test_idx, scaler


def build_variant(cfg: RunConfig, task: str, index: int):
    forest = RandomForestClassifier(
        n_estimators=int(cfg.n_estimators[index]),
        random_state=child_seed(cfg.seed, index),
        n_jobs=cfg.n_jobs,
        **cfg.forest_params(),
    )
    if task == "presence":
        return forest
    return OneVsRestClassifier(forest, random_state=child_seed(cfg.seed, index))


def _variant_names(cfg):
    return [f"RandomForest{i + 1}" for i in range(len(cfg.n_estimators))]


ENSEMBLE_NAME = "VotingEnsemble (soft)"


def _reports(ensemble, X, y, classes, present_only):
    out = {}
    for name, member in ensemble.estimators:
        out[name] = class_report(y, member.predict(X), classes, present_only)
    out[ENSEMBLE_NAME] = class_report(y, ensemble.predict(X), classes, present_only)
    return out


def render_reports(reports):
    return "\n".join(render_report(rep, title=name) for name, rep in reports.items())


def model_path(out_dir, task):
    return Path(out_dir) / f"{task}_ensemble{MODEL_SUFFIX}"


def train(cfg: RunConfig, task: str, data_path, out_dir=None):
    """Fit the forest variants and their soft-voting ensemble for ``task``.

    Writes ``<task>_ensemble.dcmodel``, ``<task>_report.txt`` and
    ``<task>_report.csv`` to ``out_dir``; on failure nothing is left behind.

    Returns:
        ``{model name: ClassReport}`` on the held-out rows.
    """
    if task not in TASKS:
        raise ParameterError(f"unknown task {task!r}; expected one of {TASKS}")
    out_dir = Path(out_dir or cfg.out_dir)
    samples = read_prepared_csv(data_path)
    rows, X, y, train_idx, test_idx, scaler = _design(samples, cfg, task)
    classes = [0, 1] if task == "presence" else [1, 2, 3, 4, 5]
    logger.info("%s: %d rows, %d train / %d test", task, len(rows), len(train_idx), len(test_idx))

    members = []
    for i, name in enumerate(_variant_names(cfg)):
        logger.info("training %s (n_estimators=%d)", name, cfg.n_estimators[i])
        model = build_variant(cfg, task, i)
        if task == "intensity":
            model.set_params(classes=classes)
        members.append((name, model.fit(X[train_idx], y[train_idx])))
    ensemble = SoftVotingClassifier.from_fitted(members)
    reports = _reports(ensemble, X[test_idx], y[test_idx], classes, cfg.present_only)

    out_dir.mkdir(parents=True, exist_ok=True)
    targets = [model_path(out_dir, task), out_dir / f"{task}_report.txt", out_dir / f"{task}_report.csv"]
    metadata = {
        "task": task,
        "seed": cfg.seed,
        "test_fraction": cfg.test_fraction,
        "fit_scaler_on_train": cfg.fit_scaler_on_train,
        "window_days": cfg.window_days,
        "aggregator": cfg.aggregator,
        "n_estimators": list(cfg.n_estimators),
        "forest_params": cfg.forest_params(),
        "classes": classes,
        "n_train": int(len(train_idx)),
        "n_test": int(len(test_idx)),
    }
    try:
        save_model(targets[0], ensemble, feature_names=FEATURES, scaler=scaler.params_, metadata=metadata)
        targets[1].write_text(render_reports(reports), encoding="utf-8")
        reports_to_csv(reports, targets[2])
    except BaseException:
        for t in targets:
            t.unlink(missing_ok=True)
        raise
    return reports


def evaluate(model_file, data_path):
    """Recompute the held-out reports of a trained ensemble.

    The task, seed and split settings come from the model's metadata, so the
    same prepared data yields the same test rows as at training time.
    """
    loaded = load_model(model_file, expected_features=FEATURES)
    meta = loaded.metadata
    cfg = RunConfig(
        seed=meta["seed"],
        test_fraction=meta["test_fraction"],
        fit_scaler_on_train=meta["fit_scaler_on_train"],
        n_estimators=tuple(meta["n_estimators"]),
    )
    samples = read_prepared_csv(data_path)
    labeled = label_samples(samples)
    rows, y = task_subset(labeled, meta["task"])
    _, test_idx = split_indices(len(rows), cfg.seed, cfg.train_fraction)
    X = loaded.transform(feature_matrix(rows))
    return _reports(loaded.model, X[test_idx], y[test_idx], meta["classes"], False)


# -- predict ---------------------------------------------------------------------------


def _windows_for_prediction(input_path, window_days, aggregator):
    header = _read_header(input_path)
    lower = {h.lower() for h in header}
    missing = [f for f in FEATURES if f.lower() not in lower]
    if missing:
        found = [h for h in header if h.lower() not in ("fips", "date", "score", "window_len")]
        raise SchemaError(
            f"{input_path}: feature columns do not match the model; "
            f"expected {list(FEATURES)}, found {found} (missing {missing})",
            column=missing[0],
        )
    if "window_len" in lower:
        return read_prepared_csv(input_path, require_score="score" in lower)
    daily = parse_timeseries_csv(input_path, require_score=False)
    return aggregate_windows(daily, window_days, aggregator, scored_only=False)


def predict(model_file, input_path, out_path=None):
    """Class and per-class probabilities for each window in ``input_path``.

    ``input_path`` is either a prepared-sample CSV (has ``window_len``) or raw
    dailies, which are aggregated with the model's window settings at every
    date.
    """
    loaded = load_model(model_file, expected_features=FEATURES)
    meta = loaded.metadata
    windows = _windows_for_prediction(input_path, meta.get("window_days", 90), meta.get("aggregator", "mean"))
    X = loaded.transform(feature_matrix(windows))
    proba = loaded.model.predict_proba(X)
    classes = loaded.model.classes_
    out = pd.DataFrame(
        {
            "fips": windows["fips"].to_numpy(),
            "date": windows["date"].dt.strftime("%Y-%m-%d").to_numpy(),
            "predicted": classes[np.argmax(proba, axis=1)],
        }
    )
    for j, c in enumerate(classes):
        out[f"p_{c}"] = proba[:, j]
    if out_path is not None:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        out.to_csv(out_path, index=False, lineterminator="\n")
    return out


# -- importance / trends ---------------------------------------------------------------


def importance(cfg: RunConfig, data_path, out_dir=None):
    """Run the three feature-set scenarios; writes per-scenario CSVs and a summary."""
    samples = read_prepared_csv(data_path)
    labeled = label_samples(samples)

    def factory():
        return build_variant(cfg, "presence", 0)

    reports = run_scenarios(
        labeled,
        seed=cfg.seed,
        threshold=cfg.collinearity_threshold,
        forest_factory=factory,
        train_fraction=cfg.train_fraction,
        fit_scaler_on_train=cfg.fit_scaler_on_train,
    )
    write_scenario_outputs(reports, out_dir or cfg.out_dir)
    return reports


def trends(cfg: RunConfig, data_path, scenario, label, out_path=None):
    """Per-county change of ``label`` for a period scenario (1 or 2).

    ``out_path`` ending in ``.csv`` gets the table; anything else gets
    GeoJSON, which needs ``cfg.soil`` for coordinates.
    """
    if int(scenario) not in PERIOD_SCENARIOS:
        raise ParameterError(f"scenario must be one of {sorted(PERIOD_SCENARIOS)}")
    labeled = label_samples(read_prepared_csv(data_path))
    names = {}
    if cfg.fips is not None:
        registry = parse_fips_registry(cfg.fips)
        names = dict(zip(registry["fips"], registry["name"]))
    period_a, period_b = PERIOD_SCENARIOS[int(scenario)]
    summary = change_summary(labeled, label, period_a, period_b)
    if out_path is not None:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        if str(out_path).lower().endswith(".csv"):
            write_trends_csv(summary, out_path, names)
        else:
            if cfg.soil is None:
                raise ParameterError("GeoJSON output needs --soil for county coordinates")
            emit_map_data(summary, parse_soil_coords(cfg.soil), names, out_path)
    return summary, yearly_counts(labeled)
