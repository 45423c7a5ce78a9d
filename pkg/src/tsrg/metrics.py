"""Confusion matrices and the WAR / UAR evaluation metrics.

WAR (weighted average recall) is plain accuracy; UAR (unweighted average
recall) averages per-class recall over the classes actually present, so a
WAR >> UAR gap flags majority-class bias.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class EvalReport:
    confusion: np.ndarray            # k x k counts; rows = true, cols = predicted
    war: float
    uar: float
    class_names: tuple[str, ...]
    absent_classes: tuple[int, ...]  # class ids with zero true samples (excluded from UAR)

    def to_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "confusion": self.confusion.tolist(),
            "war": self.war,
            "uar": self.uar,
            "absent_classes": list(self.absent_classes),
        }

    @staticmethod
    def from_dict(d: dict) -> "EvalReport":
        return EvalReport(
            confusion=np.asarray(d["confusion"], dtype=np.int64),
            war=float(d["war"]),
            uar=float(d["uar"]),
            class_names=tuple(d["class_names"]),
            absent_classes=tuple(d["absent_classes"]),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, EvalReport):
            return NotImplemented
        return (
            np.array_equal(self.confusion, other.confusion)
            and self.war == other.war
            and self.uar == other.uar
            and self.class_names == other.class_names
            and self.absent_classes == other.absent_classes
        )


def confusion_matrix(true_labels: np.ndarray, predicted: np.ndarray, k: int) -> np.ndarray:
    true_labels = np.asarray(true_labels, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if true_labels.shape != predicted.shape:
        raise DimensionError(
            f"label vectors differ in length: {true_labels.shape} vs {predicted.shape}"
        )
    if true_labels.size and (true_labels.min() < 0 or true_labels.max() >= k
                             or predicted.min() < 0 or predicted.max() >= k):
        raise ValueError(f"labels must lie in 0..{k - 1}")
    conf = np.zeros((k, k), dtype=np.int64)
    np.add.at(conf, (true_labels, predicted), 1)
    return conf


def report_from_confusion(conf: np.ndarray,
                          class_names: tuple[str, ...] | None = None) -> EvalReport:
    conf = np.asarray(conf, dtype=np.int64)
    k = conf.shape[0]
    if class_names is None:
        class_names = tuple(str(i) for i in range(k))
    total = int(conf.sum())
    if total == 0:
        raise ValueError("confusion matrix is empty")
    row_sums = conf.sum(axis=1)
    present = row_sums > 0
    recalls = conf.diagonal()[present] / row_sums[present]
    return EvalReport(
        confusion=conf,
        war=float(conf.trace() / total),
        uar=float(recalls.mean()),
        class_names=tuple(class_names),
        absent_classes=tuple(int(i) for i in np.flatnonzero(~present)),
    )


def evaluate(true_labels: np.ndarray, predicted: np.ndarray, k: int,
             class_names: tuple[str, ...] | None = None) -> EvalReport:
    """Confusion matrix plus WAR/UAR for one prediction run."""
    return report_from_confusion(confusion_matrix(true_labels, predicted, k), class_names)


def render_text(report: EvalReport, title: str = "") -> str:
    """Row-normalized confusion table (percent) with WAR/UAR footer."""
    names = report.class_names
    width = max(10, max(len(n) for n in names) + 2)
    lines = []
    if title:
        lines.append(title)
    header = " " * width + "".join(f"{n:>{width}}" for n in names)
    lines.append(header)
    row_sums = report.confusion.sum(axis=1)
    for i, name in enumerate(names):
        if row_sums[i] > 0:
            cells = "".join(
                f"{100.0 * report.confusion[i, j] / row_sums[i]:>{width}.2f}"
                for j in range(len(names))
            )
        else:
            cells = "".join(f"{'--':>{width}}" for _ in names)
        lines.append(f"{name:<{width}}" + cells)
    lines.append(f"WAR = {100.0 * report.war:.2f}%  UAR = {100.0 * report.uar:.2f}%")
    if report.absent_classes:
        absent = ", ".join(names[i] for i in report.absent_classes)
        lines.append(f"(classes absent from ground truth, excluded from UAR: {absent})")
    return "\n".join(lines) + "\n"
