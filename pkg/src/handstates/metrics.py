"""Confusion matrices and per-class precision/recall/F1 reporting.

The text rendering rounds to two decimals (half away from zero) for
display; the JSON twin keeps full precision and flags any metric whose
denominator was empty (the zero-division policy maps those to 0).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np


def confusion_matrix(y_true, y_pred, k: int) -> np.ndarray:
    """cm[i][j] = number of samples with true class i predicted as j."""
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.shape} vs {p.shape}")
    if t.size and (t.min() < 0 or t.max() >= k or p.min() < 0 or p.max() >= k):
        raise ValueError(f"labels must lie in 0..{k - 1}")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


@dataclass
class ClassReport:
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    total: int
    zero_division: list[tuple[int, str]] = field(default_factory=list)


def classification_report(cm: np.ndarray) -> ClassReport:
    """Per-class and aggregate metrics from a confusion matrix.

    Empty precision/recall denominators yield 0 and are flagged; macro
    averages run over classes with support > 0; weighted averages are
    support-weighted.
    """
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion matrix must be square, got {cm.shape}")
    total = int(cm.sum())
    if total == 0:
        raise ValueError("empty confusion matrix")
    k = cm.shape[0]
    diag = np.diag(cm).astype(np.float64)
    support = cm.sum(axis=1)
    col_sum = cm.sum(axis=0)

    precision = np.zeros(k)
    recall = np.zeros(k)
    f1 = np.zeros(k)
    flags: list[tuple[int, str]] = []
    for c in range(k):
        if col_sum[c] > 0:
            precision[c] = diag[c] / col_sum[c]
        else:
            flags.append((c, "precision"))
        if support[c] > 0:
            recall[c] = diag[c] / support[c]
        else:
            flags.append((c, "recall"))
        if precision[c] + recall[c] > 0:
            f1[c] = 2 * precision[c] * recall[c] / (precision[c] + recall[c])
        else:
            flags.append((c, "f1"))

    present = support > 0
    n_present = int(present.sum())
    weights = support / total
    return ClassReport(
        precision=precision,
        recall=recall,
        f1=f1,
        support=support.astype(np.int64),
        accuracy=float(diag.sum() / total),
        macro_precision=float(precision[present].sum() / n_present),
        macro_recall=float(recall[present].sum() / n_present),
        macro_f1=float(f1[present].sum() / n_present),
        weighted_precision=float((weights * precision).sum()),
        weighted_recall=float((weights * recall).sum()),
        weighted_f1=float((weights * f1).sum()),
        total=total,
        zero_division=flags,
    )


def round_half_away(x: float, ndigits: int = 2) -> float:
    """Round half away from zero (display rounding for report cells)."""
    scale = 10.0**ndigits
    return float(np.copysign(np.floor(abs(x) * scale + 0.5) / scale, x))


def render_report(report: ClassReport, class_names: list[str]) -> str:
    """Fixed-width text table in class order, two-decimal cells."""
    if len(class_names) != report.precision.shape[0]:
        raise ValueError("class_names length must match the report")
    name_width = max(12, max(len(n) for n in class_names))
    col = 9

    def fmt(x: float) -> str:
        return f"{round_half_away(x):.2f}".rjust(col)

    lines = [
        " " * name_width
        + "precision".rjust(col)
        + "recall".rjust(col)
        + "f1-score".rjust(col)
        + "support".rjust(col)
    ]
    lines.append("")
    for c, name in enumerate(class_names):
        lines.append(
            name.rjust(name_width)
            + fmt(report.precision[c])
            + fmt(report.recall[c])
            + fmt(report.f1[c])
            + str(int(report.support[c])).rjust(col)
        )
    lines.append("")
    lines.append(
        "accuracy".rjust(name_width)
        + " " * (2 * col)
        + fmt(report.accuracy)
        + str(report.total).rjust(col)
    )
    lines.append(
        "macro avg".rjust(name_width)
        + fmt(report.macro_precision)
        + fmt(report.macro_recall)
        + fmt(report.macro_f1)
        + str(report.total).rjust(col)
    )
    lines.append(
        "weighted avg".rjust(name_width)
        + fmt(report.weighted_precision)
        + fmt(report.weighted_recall)
        + fmt(report.weighted_f1)
        + str(report.total).rjust(col)
    )
    return "\n".join(lines) + "\n"


def report_json(report: ClassReport, class_names: list[str]) -> dict:
    """Machine-readable twin of the text table, full precision."""
    per_class = {
        name: {
            "precision": float(report.precision[c]),
            "recall": float(report.recall[c]),
            "f1": float(report.f1[c]),
            "support": int(report.support[c]),
        }
        for c, name in enumerate(class_names)
    }
    return {
        "classes": per_class,
        "accuracy": report.accuracy,
        "macro_avg": {
            "precision": report.macro_precision,
            "recall": report.macro_recall,
            "f1": report.macro_f1,
        },
        "weighted_avg": {
            "precision": report.weighted_precision,
            "recall": report.weighted_recall,
            "f1": report.weighted_f1,
        },
        "total_support": report.total,
        "zero_division": [
            {"class": class_names[c], "metric": metric}
            for c, metric in report.zero_division
        ],
    }


def write_report_files(report: ClassReport, class_names: list[str], out_dir) -> None:
    from pathlib import Path

    out = Path(out_dir)
    (out / "report.txt").write_text(render_report(report, class_names))
    with open(out / "report.json", "w") as fh:
        json.dump(report_json(report, class_names), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_confusion_csv(cm: np.ndarray, class_names: list[str], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(class_names)
        for row in np.asarray(cm):
            writer.writerow([int(v) for v in row])
