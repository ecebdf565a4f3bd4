import zipfile

import numpy as np
import pytest

from droughtcast.errors import ModelFormatError
from droughtcast.learners import (
    DecisionTreeClassifier,
    KNeighborsClassifier,
    LogisticRegression,
    OneVsRestClassifier,
    RandomForestClassifier,
    SoftVotingClassifier,
)
from droughtcast.persist import load_model, save_model
from droughtcast.preprocess import MinMaxScaler

NAMES = ("a", "b", "c")


def _data(k=3):
    rng = np.random.default_rng(0)
    y = rng.integers(0, k, 90)
    return rng.normal(size=(90, 3)) + y[:, None], y


def _models():
    X, y = _data()
    Xb, yb = _data(2)
    f1 = RandomForestClassifier(n_estimators=4, random_state=1).fit(X, y)
    f2 = RandomForestClassifier(n_estimators=3, random_state=2, max_depth=3).fit(X, y)
    return [
        (f1, X),
        (DecisionTreeClassifier(max_depth=4).fit(X, y), X),
        (SoftVotingClassifier.from_fitted([("f1", f1), ("f2", f2)]), X),
        (OneVsRestClassifier(RandomForestClassifier(n_estimators=2), random_state=5).fit(X, y + 1), X),
        (KNeighborsClassifier(3).fit(X, y), X),
        (LogisticRegression(epochs=50).fit(Xb, yb), Xb),
    ]


@pytest.mark.parametrize("index", range(6))
def test_round_trip_predictions_identical(tmp_path, index):
    model, X = _models()[index]
    scaler = MinMaxScaler().fit(X)
    path = save_model(tmp_path / "m.dcmodel", model, feature_names=NAMES, scaler=scaler.params_, metadata={"k": 1})
    loaded = load_model(path, expected_features=NAMES)
    np.testing.assert_array_equal(loaded.model.predict_proba(X), model.predict_proba(X))
    np.testing.assert_array_equal(loaded.model.classes_, model.classes_)
    np.testing.assert_array_equal(loaded.transform(X), scaler.transform(X))
    assert loaded.metadata == {"k": 1}


def test_files_are_byte_identical(tmp_path):
    model, _ = _models()[2]
    a = save_model(tmp_path / "a.dcmodel", model, feature_names=NAMES)
    b = save_model(tmp_path / "b.dcmodel", model, feature_names=NAMES)
    assert a.read_bytes() == b.read_bytes()


def test_feature_mismatch_and_bad_files(tmp_path):
    model, _ = _models()[0]
    path = save_model(tmp_path / "m.dcmodel", model, feature_names=NAMES)
    with pytest.raises(ModelFormatError, match="feature mismatch"):
        load_model(path, expected_features=("a", "b"))
    junk = tmp_path / "junk.dcmodel"
    junk.write_bytes(b"not a zip")
    with pytest.raises(ModelFormatError):
        load_model(junk)
    with zipfile.ZipFile(tmp_path / "v9.dcmodel", "w") as zf:
        zf.writestr("manifest.json", '{"format": "droughtcast-model", "schema_version": 9}')
    with pytest.raises(ModelFormatError, match="schema version"):
        load_model(tmp_path / "v9.dcmodel")
