"""Model files.

A model file is a zip archive with fixed timestamps, so identical models give
byte-identical files:

``manifest.json``
    ``format`` (``"droughtcast-model"``), ``schema_version``,
    ``feature_names``, ``scaler`` (per-feature ``min``/``max``), free-form
    ``metadata`` and ``model``, a nested description of the estimator tree.
``arrays/<n>.npy``
    Numeric payload referenced from ``model`` by entry name. A forest stores
    the node arrays of all its trees concatenated, with ``offsets`` marking
    where each tree starts.

Supported estimators: forest, tree, soft-voting ensemble, one-vs-rest,
k-NN and logistic regression.
"""

from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np

from .errors import ModelFormatError
from .learners.baselines import KNeighborsClassifier, LogisticRegression
from .learners.ensemble import SoftVotingClassifier
from .learners.forest import RandomForestClassifier
from .learners.multiclass import OneVsRestClassifier
from .learners.tree import DecisionTreeClassifier, Tree
from .preprocess import MinMaxScaler, ScalerParams

FORMAT = "droughtcast-model"
SCHEMA_VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)
_TREE_FIELDS = ("feature", "threshold", "left", "right", "value", "n_node_samples", "impurity")


class _Writer:
    def __init__(self):
        self.arrays = []

    def add(self, array):
        name = f"arrays/{len(self.arrays):06d}.npy"
        self.arrays.append((name, np.ascontiguousarray(array)))
        return name


def _classes_json(classes):
    return np.asarray(classes).tolist()


def _encode_trees(trees, w):
    offsets = np.cumsum([0] + [t.node_count for t in trees])
    packed = {f: w.add(np.concatenate([getattr(t, f) for t in trees])) for f in _TREE_FIELDS}
    return {"offsets": w.add(offsets), "fields": packed}


_BASE_KINDS = {
    "forest": RandomForestClassifier,
    "tree": DecisionTreeClassifier,
    "knn": KNeighborsClassifier,
    "logistic": LogisticRegression,
}


def _base_spec(estimator):
    for kind, cls in _BASE_KINDS.items():
        if type(estimator) is cls:
            params = estimator.get_params(deep=False)
            params.pop("n_jobs", None)
            return {"kind": kind, "params": params}
    raise ModelFormatError(f"cannot serialise base estimator {type(estimator).__name__}")


def _encode(model, w):
    params = model.get_params(deep=False)
    if isinstance(model, RandomForestClassifier):
        return {
            "kind": "forest",
            "params": {k: v for k, v in params.items() if k != "n_jobs"},
            "classes": _classes_json(model.classes_),
            "n_features": model.n_features_in_,
            "trees": _encode_trees(model.estimators_, w),
        }
    if isinstance(model, DecisionTreeClassifier):
        return {
            "kind": "tree",
            "params": params,
            "classes": _classes_json(model.classes_),
            "n_features": model.n_features_in_,
            "trees": _encode_trees([model.tree_], w),
        }
    if isinstance(model, SoftVotingClassifier):
        return {
            "kind": "soft_voting",
            "weights": model.weights,
            "members": [{"name": name, "model": _encode(est, w)} for name, est in model.estimators],
        }
    if isinstance(model, OneVsRestClassifier):
        return {
            "kind": "one_vs_rest",
            "random_state": model.random_state,
            "base": _base_spec(model.estimator),
            "classes": _classes_json(model.classes_),
            "members": [_encode(est, w) for est in model.estimators_],
        }
    if isinstance(model, KNeighborsClassifier):
        return {
            "kind": "knn",
            "params": params,
            "classes": _classes_json(model.classes_),
            "X": w.add(model._X),
            "codes": w.add(model._codes.astype(np.int64)),
        }
    if isinstance(model, LogisticRegression):
        return {
            "kind": "logistic",
            "params": params,
            "classes": _classes_json(model.classes_),
            "coef": w.add(model.coef_),
            "intercept": float(model.intercept_),
        }
    raise ModelFormatError(f"cannot serialise {type(model).__name__}")


def _decode_trees(spec, arrays):
    offsets = arrays[spec["offsets"]]
    fields = {f: arrays[name] for f, name in spec["fields"].items()}
    return [
        Tree(**{f: fields[f][offsets[i] : offsets[i + 1]] for f in _TREE_FIELDS})
        for i in range(len(offsets) - 1)
    ]


def _decode(spec, arrays):
    kind = spec.get("kind")
    if kind == "forest":
        model = RandomForestClassifier(**spec["params"])
        model.estimators_ = _decode_trees(spec["trees"], arrays)
    elif kind == "tree":
        model = DecisionTreeClassifier(**spec["params"])
        model.tree_ = _decode_trees(spec["trees"], arrays)[0]
    elif kind == "soft_voting":
        members = [(m["name"], _decode(m["model"], arrays)) for m in spec["members"]]
        return SoftVotingClassifier.from_fitted(members, spec["weights"])
    elif kind == "one_vs_rest":
        members = [_decode(m, arrays) for m in spec["members"]]
        base_cls = _BASE_KINDS[spec["base"]["kind"]]
        model = OneVsRestClassifier(base_cls(**spec["base"]["params"]), random_state=spec["random_state"])
        model.estimators_ = members
        model.classes_ = np.asarray(spec["classes"])
        model.n_features_in_ = members[0].n_features_in_
        return model
    elif kind == "knn":
        model = KNeighborsClassifier(**spec["params"])
        model._X = arrays[spec["X"]]
        model._codes = arrays[spec["codes"]]
        model.n_features_in_ = model._X.shape[1]
    elif kind == "logistic":
        model = LogisticRegression(**spec["params"])
        model.coef_ = arrays[spec["coef"]]
        model.intercept_ = spec["intercept"]
        model.n_features_in_ = len(model.coef_)
    else:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    model.classes_ = np.asarray(spec["classes"])
    if "n_features" in spec:
        model.n_features_in_ = spec["n_features"]
    return model


def _zip_entry(zf, name, data):
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    zf.writestr(info, data)


def save_model(path, model, *, feature_names, scaler=None, metadata=None):
    """Write ``model`` (plus its scaler and feature names) to ``path``."""
    w = _Writer()
    spec = _encode(model, w)
    manifest = {
        "format": FORMAT,
        "schema_version": SCHEMA_VERSION,
        "feature_names": list(feature_names),
        "scaler": None
        if scaler is None
        else {"min": np.asarray(scaler.min_).tolist(), "max": np.asarray(scaler.max_).tolist()},
        "metadata": metadata or {},
        "model": spec,
    }
    path = Path(path)
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        _zip_entry(zf, "manifest.json", json.dumps(manifest, indent=1, sort_keys=True))
        for name, array in w.arrays:
            data = io.BytesIO()
            np.lib.format.write_array(data, array, allow_pickle=False)
            _zip_entry(zf, name, data.getvalue())
    try:
        path.write_bytes(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write model file {path}: {exc}") from exc
    return path


class LoadedModel:
    """A model read back from disk with its preprocessing context."""

    def __init__(self, model, feature_names, scaler_params, metadata):
        self.model = model
        self.feature_names = tuple(feature_names)
        self.scaler_params = scaler_params
        self.metadata = metadata

    @property
    def scaler(self):
        return None if self.scaler_params is None else MinMaxScaler.from_params(self.scaler_params)

    def transform(self, X):
        return X if self.scaler_params is None else self.scaler.transform(X)


def load_model(path, expected_features=None) -> LoadedModel:
    """Read a model file.

    Raises:
        ModelFormatError: not a model file, unsupported schema version, or
            feature names differ from ``expected_features``.
    """
    path = Path(path)
    try:
        with zipfile.ZipFile(path) as zf:
            manifest = json.loads(zf.read("manifest.json"))
            arrays = {
                name: np.lib.format.read_array(io.BytesIO(zf.read(name)), allow_pickle=False)
                for name in zf.namelist()
                if name.startswith("arrays/")
            }
    except (zipfile.BadZipFile, KeyError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: not a droughtcast model file ({exc})") from exc
    if manifest.get("format") != FORMAT:
        raise ModelFormatError(f"{path}: unexpected format {manifest.get('format')!r}")
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise ModelFormatError(
            f"{path}: schema version {manifest.get('schema_version')} not supported "
            f"(expected {SCHEMA_VERSION})"
        )
    names = manifest["feature_names"]
    if expected_features is not None and list(expected_features) != list(names):
        raise ModelFormatError(
            f"{path}: feature mismatch; model expects {names}, got {list(expected_features)}"
        )
    scaler = manifest.get("scaler")
    params = None if scaler is None else ScalerParams(np.array(scaler["min"]), np.array(scaler["max"]))
    return LoadedModel(_decode(manifest["model"], arrays), names, params, manifest.get("metadata", {}))
