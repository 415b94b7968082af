"""Evaluation arithmetic: 3x3 confusion matrices, per-class precision/recall/F1,
and macro / support-weighted aggregates.

Conventions: rows are true labels, columns are predictions, both in label
ordinal order. A class absent from the predictions (zero column) or from the
truth (zero row) scores 0 for the affected metric rather than dividing by
zero. Display rounding is banker's (half-even); stored values keep full
precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from .corpus import LABELS, SentimentLabel

if TYPE_CHECKING:  # pragma: no cover
    from .models import PredictionRecord

_Row = tuple[int, int, int]


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: tuple[_Row, _Row, _Row]

    def __post_init__(self) -> None:
        if len(self.counts) != 3 or any(len(row) != 3 for row in self.counts):
            raise ValueError("confusion matrix must be 3x3")
        if any(c < 0 or c != int(c) for row in self.counts for c in row):
            raise ValueError("confusion matrix counts must be nonnegative integers")

    @classmethod
    def zeros(cls) -> "ConfusionMatrix":
        return cls(((0, 0, 0), (0, 0, 0), (0, 0, 0)))

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "ConfusionMatrix":
        return cls(tuple(tuple(int(c) for c in row) for row in rows))

    @property
    def row_sums(self) -> tuple[int, int, int]:
        return tuple(sum(row) for row in self.counts)

    @property
    def col_sums(self) -> tuple[int, int, int]:
        return tuple(sum(row[j] for row in self.counts) for j in range(3))

    @property
    def total(self) -> int:
        return sum(self.row_sums)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(3))

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix.from_rows(
            (a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.counts, other.counts)
        )


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassReport:
    per_class: tuple[ClassMetrics, ClassMetrics, ClassMetrics]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float

    def for_label(self, label: SentimentLabel) -> ClassMetrics:
        return self.per_class[label]

    def to_dict(self) -> dict:
        return {
            "classes": {
                lab.tag: {
                    "precision": self.per_class[lab].precision,
                    "recall": self.per_class[lab].recall,
                    "f1": self.per_class[lab].f1,
                    "support": self.per_class[lab].support,
                }
                for lab in LABELS
            },
            "accuracy": self.accuracy,
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "weighted": {
                "precision": self.weighted_precision,
                "recall": self.weighted_recall,
                "f1": self.weighted_f1,
            },
        }


def confusion_matrix(records: Iterable["PredictionRecord"]) -> ConfusionMatrix:
    """Tally true-vs-predicted counts; every record must carry a true label."""
    counts = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    for record in records:
        if record.true_label is None:
            raise ValueError(f"record {record.sample_id!r} has no true label")
        counts[record.true_label][record.predicted] += 1
    return ConfusionMatrix.from_rows(counts)


def per_language_matrices(
    records: Iterable["PredictionRecord"],
) -> dict[str, ConfusionMatrix]:
    """One matrix per language; their elementwise sum equals the overall matrix."""
    by_language: dict[str, list["PredictionRecord"]] = {}
    for record in records:
        by_language.setdefault(record.language, []).append(record)
    return {lang: confusion_matrix(recs) for lang, recs in sorted(by_language.items())}


def classification_report(cm: ConfusionMatrix) -> ClassReport:
    total = cm.total
    if total == 0:
        raise ValueError("empty confusion matrix")
    row_sums, col_sums = cm.row_sums, cm.col_sums

    per_class = []
    for c in range(3):
        hits = cm.counts[c][c]
        precision = hits / col_sums[c] if col_sums[c] else 0.0
        recall = hits / row_sums[c] if row_sums[c] else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class.append(ClassMetrics(precision, recall, f1, row_sums[c]))

    def macro(metric: str) -> float:
        return sum(getattr(m, metric) for m in per_class) / 3

    def weighted(metric: str) -> float:
        return sum(getattr(m, metric) * m.support for m in per_class) / total

    return ClassReport(
        per_class=tuple(per_class),
        accuracy=cm.trace / total,
        macro_precision=macro("precision"),
        macro_recall=macro("recall"),
        macro_f1=macro("f1"),
        weighted_precision=weighted("precision"),
        weighted_recall=weighted("recall"),
        weighted_f1=weighted("f1"),
    )


def rounded_report(report: ClassReport, ndigits: int = 2) -> dict:
    """Report dict with half-even display rounding applied to every metric."""

    def walk(node):
        if isinstance(node, dict):
            return {k: walk(v) for k, v in node.items()}
        if isinstance(node, float):
            return round(node, ndigits)
        return node

    return walk(report.to_dict())
