"""Acceptance gate: one test per criterion, one PASS/FAIL/SKIP line each.

Criteria 1-5 need the public drought dataset. Point ``DROUGHTCAST_DATA_DIR``
at a directory holding ``train_timeseries.csv``, ``validation_timeseries.csv``,
``test_timeseries.csv``, the county registry ``fips.csv`` (columns FIPS, Name,
State) and optionally ``soil_data.csv`` (files may sit in subfolders).
``DROUGHTCAST_N_JOBS`` sets training parallelism for those runs. Criteria
6-10 use no external data.
"""

from __future__ import annotations

import os
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from droughtcast import cli, pipeline
from droughtcast.features import FEATURES
from droughtcast.learners import (
    KNeighborsClassifier,
    OneVsRestClassifier,
    RandomForestClassifier,
    SoftVotingClassifier,
)
from droughtcast.learners.tree import fit_tree
from droughtcast.metrics import class_report
from droughtcast.preprocess import MinMaxScaler, label_samples
from droughtcast.trends import scenario_summary, yearly_counts
from droughtcast.window import build_window_samples, read_prepared_csv

from conftest import ACCEPTANCE_LINES, real_data_dir, synthetic_daily, write_dataset
from oracles import hand_report, oracle_knn, oracle_proba, oracle_tree


@contextmanager
def criterion(number, title):
    """Record one result line; failures still propagate to pytest."""
    start = time.perf_counter()
    notes = []
    try:
        yield notes
    except pytest.skip.Exception as exc:
        ACCEPTANCE_LINES.append(f"criterion {number}: SKIP {title} ({exc.msg})")
        raise
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"criterion {number}: FAIL {title} ({type(exc).__name__}: {exc})".splitlines()[0])
        raise
    else:
        detail = "; ".join(notes)
        ACCEPTANCE_LINES.append(
            f"criterion {number}: PASS {title} [{time.perf_counter() - start:.1f}s]" + (f" ({detail})" if detail else "")
        )


# -- dataset-dependent ------------------------------------------------------------------

REAL_FILES = ("train_timeseries.csv", "validation_timeseries.csv", "test_timeseries.csv", "fips.csv")


def _find(root, name):
    direct = root / name
    if direct.is_file():
        return direct
    hits = sorted(root.rglob(name))
    return hits[0] if hits else None


def _real_paths():
    """Dataset file paths, or the reason they are unavailable."""
    root = real_data_dir()
    if root is None:
        return None, "DROUGHTCAST_DATA_DIR not set; public drought dataset unavailable"
    paths = {name: _find(root, name) for name in (*REAL_FILES, "soil_data.csv")}
    missing = [n for n in REAL_FILES if paths[n] is None]
    if missing:
        return None, f"dataset files missing under {root}: {missing}"
    return paths, None


def require(value):
    """Skip (inside a criterion block) when the dataset is unavailable."""
    if isinstance(value, str):
        pytest.skip(value)
    return value


@pytest.fixture(scope="module")
def real_config(tmp_path_factory):
    paths, reason = _real_paths()
    if paths is None:
        return reason
    out = tmp_path_factory.mktemp("real")
    cfg = pipeline.load_config(
        overrides={
            "train": str(paths["train_timeseries.csv"]),
            "validation": str(paths["validation_timeseries.csv"]),
            "test": str(paths["test_timeseries.csv"]),
            "fips": str(paths["fips.csv"]),
            "soil": str(paths["soil_data.csv"]) if paths["soil_data.csv"] else None,
            "n_jobs": os.environ.get("DROUGHTCAST_N_JOBS", "1"),
            "out_dir": str(out),
        },
    )
    return cfg


@pytest.fixture(scope="module")
def real_prepared(real_config):
    if isinstance(real_config, str):
        return real_config
    path = Path(real_config.out_dir) / "ninety_days_aggregated_data_ca_drought.csv"
    pipeline.prepare(real_config, path)
    return path


@pytest.mark.dataset
def test_criterion_1_prepare_row_count(real_prepared):
    with criterion(1, "prepare yields 63568 CA samples with 18 features + score") as notes:
        samples = read_prepared_csv(require(real_prepared))
        notes.append(f"rows={len(samples)} counties={samples['fips'].nunique()}")
        assert samples[list(FEATURES) + ["score"]].shape[1] == 19
        assert samples["fips"].nunique() == 58
        assert len(samples) == 63568


PRESENCE_TARGETS = {"RandomForest1": 0.84657, "RandomForest2": 0.84631, "RandomForest3": 0.84327}


@pytest.mark.dataset
def test_criterion_2_presence_accuracy(real_config, real_prepared):
    with criterion(2, "presence accuracies within 0.015 of the published values") as notes:
        reports = pipeline.train(require(real_config), "presence", require(real_prepared))
        got = {name: rep.accuracy for name, rep in reports.items()}
        notes.append(" ".join(f"{k}={v:.5f}" for k, v in got.items()))
        for name, target in PRESENCE_TARGETS.items():
            assert abs(got[name] - target) <= 0.015, (name, got[name], target)
        assert abs(got[pipeline.ENSEMBLE_NAME] - 0.84642) <= 0.015


INTENSITY_TARGETS = {"RandomForest1": 0.72240, "RandomForest2": 0.73125, "RandomForest3": 0.73218}
# ensemble rows: class -> (precision, recall, support)
ENSEMBLE_ROWS = {
    1: (0.73, 0.78, 3126),
    2: (0.68, 0.76, 2970),
    3: (0.73, 0.72, 2323),
    4: (0.83, 0.60, 1164),
    5: (0.86, 0.70, 1152),
}


@pytest.mark.dataset
def test_criterion_3_intensity(real_config, real_prepared):
    with criterion(3, "intensity accuracies, per-class rates and supports") as notes:
        reports = pipeline.train(require(real_config), "intensity", require(real_prepared))
        got = {name: rep.accuracy for name, rep in reports.items()}
        notes.append(" ".join(f"{k}={v:.5f}" for k, v in got.items()))
        ens = reports[pipeline.ENSEMBLE_NAME]
        notes.append(f"test rows={ens.total_support}")
        assert ens.total_support == 10735
        for name, target in INTENSITY_TARGETS.items():
            assert abs(got[name] - target) <= 0.02, (name, got[name], target)
        assert abs(ens.accuracy - 0.73367) <= 0.02
        for label, (precision, recall, support) in ENSEMBLE_ROWS.items():
            row = ens.row(label)
            assert abs(row.precision - precision) <= 0.05, (label, row.precision)
            assert abs(row.recall - recall) <= 0.05, (label, row.recall)
            assert abs(row.support - support) <= 0.03 * support, (label, row.support)


SCENARIO_TARGETS = {"full": 0.84657, "collinearity_pruned": 0.8527, "family_pruned": 0.8155}


@pytest.mark.dataset
def test_criterion_4_importance(real_config, real_prepared):
    with criterion(4, "importance scenario accuracies and top-3 features") as notes:
        cfg = require(real_config)
        reports = pipeline.importance(cfg, require(real_prepared), Path(cfg.out_dir) / "importance")
        for rep in reports:
            notes.append(f"{rep.scenario}={rep.accuracy:.4f} top3={','.join(rep.top(3))}")
        for rep in reports:
            assert abs(rep.accuracy - SCENARIO_TARGETS[rep.scenario]) <= 0.02, rep.scenario
            assert set(rep.top(3)) == {"PRECTOT", "PS", "QV2M"}, rep.scenario


# label -> (positive, negative), scenario 1
TREND_TARGETS = {"0": (3, 55), "D0": (16, 42), "D1": (10, 48), "D2": (22, 36), "D3": (50, 8), "D4": (58, 0)}


@pytest.mark.dataset
def test_criterion_5_trends(real_prepared):
    with criterion(5, "scenario-1 county change counts and pre-2014 D4 absence") as notes:
        labeled = label_samples(read_prepared_csv(require(real_prepared)))
        counts = {}
        for label in TREND_TARGETS:
            s = scenario_summary(labeled, label, 1)
            counts[label] = (s.n_positive, s.n_negative)
        notes.append(" ".join(f"{k}={v}" for k, v in counts.items()))
        assert counts["D4"] == TREND_TARGETS["D4"]
        for label, (pos, neg) in TREND_TARGETS.items():
            assert abs(counts[label][0] - pos) <= 2 and abs(counts[label][1] - neg) <= 2, label
        yearly = yearly_counts(labeled)
        assert (yearly.loc[yearly.index < 2014, "D4"] == 0).all()


# -- dataset-free -----------------------------------------------------------------------


def _random_instance(rng):
    n = int(rng.integers(1, 61))
    d = int(rng.integers(1, 4))
    k = int(rng.integers(1, 4))
    kind = rng.integers(0, 3)
    if kind == 0:
        X = rng.integers(0, 4, size=(n, d)).astype(float)
    elif kind == 1:
        X = rng.normal(size=(n, d)).round(1)
    else:
        X = rng.normal(size=(n, d))
    y = rng.integers(0, k, size=n)
    return X, y, k


def test_criterion_6_tree_oracle():
    with criterion(6, "fit_tree equals the exhaustive-split oracle on 200 instances") as notes:
        rng = np.random.default_rng(6)
        checked = 0
        for _ in range(200):
            X, y, k = _random_instance(rng)
            depth = [None, None, 2, 4][int(rng.integers(0, 4))]
            leaf = int(rng.integers(1, 3))
            tree = fit_tree(X, y, k, max_depth=depth, min_samples_leaf=leaf)
            oracle = oracle_tree(X.tolist(), y.tolist(), k, depth, leaf)
            lo, hi = X.min() - 1, X.max() + 1
            queries = np.vstack([X, rng.uniform(lo, hi, size=(20, X.shape[1]))])
            got = tree.predict_proba(queries)
            for q, row in zip(queries, got):
                expected = [float(p) for p in oracle_proba(oracle, q.tolist())]
                assert row.tolist() == expected
                checked += 1
        notes.append(f"{checked} predictions compared")


def test_criterion_7_metrics_oracle():
    with criterion(7, "class_report hand example and weighted recall = accuracy") as notes:
        rep = class_report([1, 1, 2], [1, 2, 2], [1, 2])
        assert (rep.row(1).precision, rep.row(1).recall) == (1.0, 0.5)
        assert rep.row(1).f1 == pytest.approx(2 / 3)
        assert (rep.row(2).precision, rep.row(2).recall) == (0.5, 1.0)
        assert rep.accuracy == pytest.approx(2 / 3)
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(1, 80))
            k = int(rng.integers(2, 6))
            truth, pred = rng.integers(0, k, n).tolist(), rng.integers(0, k, n).tolist()
            classes = list(range(k))
            rep = class_report(truth, pred, classes)
            acc = Fraction(sum(t == p for t, p in zip(truth, pred)), n)
            assert rep.accuracy == pytest.approx(float(acc), abs=1e-15)
            assert rep.weighted_avg.recall == pytest.approx(float(acc), abs=1e-12)
            expected = hand_report(truth, pred, classes)
            for r in rep.rows:
                assert (r.precision, r.recall, r.f1, r.support) == pytest.approx(expected[r.label])
        notes.append("100 random label sets")


def test_criterion_8_probability_laws():
    with criterion(8, "predict_proba rows are non-negative and sum to 1") as notes:
        rng = np.random.default_rng(8)
        n_models = 0
        for trial in range(12):
            k = int(rng.integers(2, 6))
            n, d = int(rng.integers(30, 120)), int(rng.integers(1, 6))
            y = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
            X = rng.normal(size=(n, d)) + y[:, None] * rng.uniform(0, 2)
            forest_a = RandomForestClassifier(n_estimators=int(rng.integers(1, 8)), random_state=trial).fit(X, y)
            forest_b = RandomForestClassifier(n_estimators=3, max_depth=2, random_state=trial + 100).fit(X, y)
            ovr = OneVsRestClassifier(RandomForestClassifier(n_estimators=3), random_state=trial).fit(X, y)
            models = [
                forest_a,
                forest_b,
                ovr,
                SoftVotingClassifier.from_fitted([("a", forest_a), ("b", forest_b)]),
                SoftVotingClassifier.from_fitted([("a", forest_a), ("o", ovr)], weights=[1, 3]),
            ]
            queries = rng.normal(size=(50, d)) * 4
            for model in models:
                proba = model.predict_proba(queries)
                assert proba.shape == (50, k)
                assert np.all(proba >= 0)
                assert np.all(np.abs(proba.sum(axis=1) - 1.0) <= 1e-9)
                n_models += 1
        notes.append(f"{n_models} fitted models")


def _pipeline_outputs(dataset, out, jobs):
    """Run every command into ``out``; return {relative path: bytes}."""
    common = ["--n-jobs", str(jobs), "--log-level", "WARNING"]
    small = ["--n-estimators", "5", "7", "9"]
    inputs = [f"--{k}={dataset[k]}" for k in ("train", "validation", "test", "fips")]
    prepared = out / "prepared.csv"
    steps = [
        ["prepare", *inputs, "--out", str(prepared)],
        ["train", "--data", str(prepared), "--task", "presence", *small, "--out-dir", str(out / "runs")],
        ["train", "--data", str(prepared), "--task", "intensity", *small, "--out-dir", str(out / "runs")],
        ["evaluate", "--model", str(out / "runs" / "intensity_ensemble.dcmodel"), "--data", str(prepared),
         "--out", str(out / "evaluate.txt")],
        ["predict", "--model", str(out / "runs" / "presence_ensemble.dcmodel"), "--input", str(prepared),
         "--out", str(out / "predictions.csv")],
        ["importance", "--data", str(prepared), *small, "--out", str(out / "importance")],
        ["trends", "--data", str(prepared), "--label", "D2", "--fips", str(dataset["fips"]),
         "--out", str(out / "trends.csv")],
    ]
    for step in steps:
        assert cli.main([*step[:1], *common, *step[1:]]) == 0, step[0]
    return {str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}


def test_criterion_9_determinism(tmp_path):
    with criterion(9, "identical config gives byte-identical outputs across thread counts") as notes:
        dataset = write_dataset(tmp_path / "data")
        first = _pipeline_outputs(dataset, tmp_path / "run1", jobs=1)
        second = _pipeline_outputs(dataset, tmp_path / "run2", jobs=3)
        assert sorted(first) == sorted(second)
        differing = [name for name in first if first[name] != second[name]]
        assert not differing, differing
        assert {"prepared.csv", "runs/presence_ensemble.dcmodel", "runs/intensity_report.txt"} <= set(first)
        notes.append(f"{len(first)} files compared")


def test_criterion_10_scaling_window_knn():
    with criterion(10, "scaler range, constant feature, window_days=1, k-NN oracle") as notes:
        rng = np.random.default_rng(10)
        for _ in range(50):
            X = rng.normal(size=(int(rng.integers(1, 40)), 4)) * rng.uniform(0.1, 1e4)
            X[:, 2] = 3.25
            scaler = MinMaxScaler().fit(X)
            for Z in (X, rng.normal(size=(10, 4)) * 1e5):
                out = scaler.transform(Z)
                assert np.all((out >= 0.0) & (out <= 1.0))
                assert np.all(out[:, 2] == 0.0)

        daily = synthetic_daily(["06001", "06003"], start="2003-01-01", end="2003-12-31", seed=3)
        samples = build_window_samples(daily, window_days=1)
        scored = daily.loc[daily["score"].notna()].sort_values(["fips", "date"]).reset_index(drop=True)
        assert len(samples) == len(scored)
        np.testing.assert_array_equal(samples[list(FEATURES)].to_numpy(), scored[list(FEATURES)].to_numpy())

        compared = 0
        for _ in range(20):
            X = rng.integers(0, 6, size=(30, 2)).astype(float)
            y = rng.integers(0, 3, 30)
            queries = np.vstack([X[:5], rng.uniform(-1, 7, size=(10, 2))])
            for k in (1, 3, 5, 7):
                got = KNeighborsClassifier(k).fit(X, y).predict(queries)
                want = [oracle_knn(X.tolist(), y.tolist(), q.tolist(), k) for q in queries]
                assert got.tolist() == want
                compared += len(queries)
        notes.append(f"{compared} k-NN queries")
