"""Accuracy, per-class precision/recall/F1 and the text/CSV report layout."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class ClassRow:
    label: object
    precision: float
    recall: float
    f1: float
    support: int
    # set when a rate had a zero denominator and was reported as 0
    zero_division: tuple = ()


@dataclass(frozen=True)
class Average:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ClassReport:
    accuracy: float
    rows: tuple
    macro_avg: Average
    weighted_avg: Average
    total_support: int
    micro_f1: float
    confusion: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def labels(self):
        return [r.label for r in self.rows]

    def row(self, label):
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)


def _encode(labels, classes, what):
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        return np.array([lookup[v] for v in labels], dtype=np.int64)
    except KeyError as exc:
        raise InputError(f"{what} label {exc.args[0]!r} not in classes {list(classes)}") from None


def _as_list(values):
    return np.asarray(values).tolist()


def confusion_matrix(truth, pred, classes):
    """``K x K`` matrix whose entry (i, j) counts truth=classes[i], pred=classes[j]."""
    truth, pred, classes = _as_list(truth), _as_list(pred), _as_list(classes)
    if len(truth) != len(pred):
        raise InputError(f"truth has {len(truth)} labels but pred has {len(pred)}")
    if len(set(classes)) != len(classes):
        raise InputError("classes must be distinct")
    k = len(classes)
    t = _encode(truth, classes, "truth")
    p = _encode(pred, classes, "pred")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


def _safe_ratio(num, den):
    return (num / den, False) if den > 0 else (0.0, True)


def report_from_confusion(cm, classes, present_only=False):
    """Build a :class:`ClassReport` from a confusion matrix.

    Zero denominators give 0 and are flagged on the row. With
    ``present_only`` the macro average skips classes with zero support.
    """
    cm = np.asarray(cm, dtype=np.int64)
    classes = _as_list(classes)
    if len(classes) == 0:
        raise InputError("a report needs at least one class")
    total = int(cm.sum())
    tp = np.diag(cm)
    support = cm.sum(axis=1)
    predicted = cm.sum(axis=0)

    rows = []
    for i, label in enumerate(classes):
        precision, p_zero = _safe_ratio(float(tp[i]), float(predicted[i]))
        recall, r_zero = _safe_ratio(float(tp[i]), float(support[i]))
        f1, f_zero = _safe_ratio(2 * precision * recall, precision + recall)
        flags = tuple(
            name for name, hit in (("precision", p_zero), ("recall", r_zero), ("f1", f_zero)) if hit
        )
        rows.append(ClassRow(label, precision, recall, f1, int(support[i]), flags))

    macro_rows = [r for r in rows if r.support > 0] if present_only else rows
    macro_rows = macro_rows or rows
    macro = Average(
        float(np.mean([r.precision for r in macro_rows])),
        float(np.mean([r.recall for r in macro_rows])),
        float(np.mean([r.f1 for r in macro_rows])),
    )
    if total > 0:
        w = support / total
        weighted = Average(
            float(np.dot(w, [r.precision for r in rows])),
            float(np.dot(w, [r.recall for r in rows])),
            float(np.dot(w, [r.f1 for r in rows])),
        )
        accuracy = float(tp.sum()) / total
    else:
        weighted = Average(0.0, 0.0, 0.0)
        accuracy = 0.0
    # single-label micro averages all collapse to accuracy
    return ClassReport(accuracy, tuple(rows), macro, weighted, total, accuracy, cm)


def class_report(truth, pred, classes, present_only=False):
    return report_from_confusion(confusion_matrix(truth, pred, classes), classes, present_only)


def accuracy_score(truth, pred):
    truth, pred = np.asarray(truth), np.asarray(pred)
    if truth.shape != pred.shape:
        raise InputError("truth and pred differ in length")
    return float(np.mean(truth == pred)) if truth.size else 0.0


def render_report(report: ClassReport, title=None, digits=2):
    """Fixed-width text table: class rows, a blank accuracy row, macro and weighted averages."""
    if not report.rows:
        raise InputError("cannot render a report without classes")
    names = [str(r.label) for r in report.rows]
    width = max(len("weighted avg"), *(len(n) for n in names))
    head = f"{'':>{width}} {'precision':>9} {'recall':>9} {'f1-score':>9} {'support':>9}"
    fmt = f"{{:>{width}}} {{:>9.{digits}f}} {{:>9.{digits}f}} {{:>9.{digits}f}} {{:>9}}"
    lines = []
    if title:
        lines.append(title)
    lines.append(f"accuracy_score: {report.accuracy!r}")
    lines.append(f"f1_score: {report.micro_f1!r}")
    lines.append(head)
    for name, r in zip(names, report.rows):
        lines.append(fmt.format(name, r.precision, r.recall, r.f1, r.support))
    lines.append("")
    lines.append(f"{'accuracy':>{width}}")
    for label, avg in (("macro avg", report.macro_avg), ("weighted avg", report.weighted_avg)):
        lines.append(fmt.format(label, avg.precision, avg.recall, avg.f1, report.total_support))
    return "\n".join(lines) + "\n"


_ROW_RE = re.compile(r"^\s*(.+?)\s+(\d+\.\d+)\s+(\d+\.\d+)\s+(\d+\.\d+)\s+(\d+)\s*$")


def parse_report(text):
    """Read back a table written by :func:`render_report`.

    Returns a dict with ``accuracy``, ``f1``, ``rows`` (label text ->
    (precision, recall, f1, support)), ``macro avg`` and ``weighted avg``.
    """
    out = {"rows": {}}
    for line in text.splitlines():
        if line.startswith("accuracy_score:"):
            out["accuracy"] = float(line.split(":", 1)[1])
        elif line.startswith("f1_score:"):
            out["f1"] = float(line.split(":", 1)[1])
        else:
            m = _ROW_RE.match(line)
            if not m:
                continue
            name = m.group(1).strip()
            values = (float(m.group(2)), float(m.group(3)), float(m.group(4)), int(m.group(5)))
            if name in ("macro avg", "weighted avg"):
                out[name] = values
            else:
                out["rows"][name] = values
    return out


REPORT_CSV_HEADER = ("model", "row", "precision", "recall", "f1", "support")


def report_records(report: ClassReport, model="model"):
    """Structured rows: one per class, then accuracy, macro and weighted averages."""
    records = [
        (model, str(r.label), r.precision, r.recall, r.f1, r.support) for r in report.rows
    ]
    records.append((model, "accuracy", "", "", report.accuracy, report.total_support))
    for label, avg in (("macro avg", report.macro_avg), ("weighted avg", report.weighted_avg)):
        records.append((model, label, avg.precision, avg.recall, avg.f1, report.total_support))
    return records


def reports_to_csv(named_reports, path=None):
    """Write ``{model name: report}`` as CSV; returns the CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_CSV_HEADER)
    for name, report in named_reports.items():
        writer.writerows(report_records(report, name))
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
