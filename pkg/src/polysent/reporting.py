"""Report-stage file emission: classification report JSON, confusion-matrix
CSVs (overall and per language), label-distribution tables, and static plots.

Every number written here comes straight out of the metrics and corpus
modules; this layer only formats. Report JSON is dumped with sorted keys so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .corpus import LABELS, DistributionTable, SentimentLabel, distribution_from_pairs
from .metrics import ConfusionMatrix, classification_report, confusion_matrix, per_language_matrices
from .models import ClassScores, PredictionRecord

_CLASS_TAGS = tuple(lab.tag for lab in LABELS)


def prediction_to_dict(record: PredictionRecord) -> dict:
    row = {
        "sample_id": record.sample_id,
        "language": record.language,
        "true": record.true_label.tag if record.true_label is not None else None,
        "predicted": record.predicted.tag,
        "scores": list(record.scores.probs),
    }
    if record.member_votes is not None:
        row["member_votes"] = [v.tag for v in record.member_votes]
    return row


def prediction_from_dict(row: dict) -> PredictionRecord:
    votes = row.get("member_votes")
    return PredictionRecord(
        sample_id=str(row["sample_id"]),
        language=str(row["language"]),
        true_label=SentimentLabel.from_tag(row["true"]) if row.get("true") is not None else None,
        scores=ClassScores(tuple(float(p) for p in row["scores"])),
        predicted=SentimentLabel.from_tag(row["predicted"]),
        member_votes=tuple(SentimentLabel.from_tag(v) for v in votes) if votes else None,
    )


def write_predictions_jsonl(path, records: Iterable[PredictionRecord]) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(prediction_to_dict(record), ensure_ascii=False) + "\n")
            count += 1
    return count


def read_predictions_jsonl(path) -> list[PredictionRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(prediction_from_dict(json.loads(line)))
    return records


def dump_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", "utf-8")
    return path


def write_confusion_csv(path, cm: ConfusionMatrix) -> Path:
    lines = ["true\\predicted," + ",".join(_CLASS_TAGS)]
    for lab in LABELS:
        lines.append(lab.tag + "," + ",".join(str(c) for c in cm.counts[lab]))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", "utf-8")
    return path


def write_distribution_csv(path, tables: Sequence[DistributionTable]) -> Path:
    header = ["scope"]
    header += [f"{tag}_count" for tag in _CLASS_TAGS]
    header += [f"{tag}_pct" for tag in _CLASS_TAGS]
    lines = [",".join(header)]
    for table in tables:
        row = [table.scope]
        row += [str(c) for c in table.counts]
        row += [repr(p) for p in table.percentages]
        lines.append(",".join(row))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", "utf-8")
    return path


def plot_confusion_heatmap(path, cm: ConfusionMatrix, title: str) -> Path:
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    image = ax.imshow(cm.counts, cmap="Blues")
    ax.set_xticks(range(3), _CLASS_TAGS)
    ax.set_yticks(range(3), _CLASS_TAGS)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(title)
    peak = max(max(row) for row in cm.counts) or 1
    for i in range(3):
        for j in range(3):
            color = "white" if cm.counts[i][j] > peak / 2 else "black"
            ax.text(j, i, str(cm.counts[i][j]), ha="center", va="center", color=color)
    fig.colorbar(image, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def plot_distribution(path, tables: Sequence[DistributionTable], title: str) -> Path:
    """Stacked per-scope bars of the three label shares."""
    scopes = [t.scope for t in tables]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(scopes)), 3.6))
    bottoms = [0.0] * len(tables)
    for lab in LABELS:
        shares = [100.0 * t.percentages[lab] for t in tables]
        ax.bar(scopes, shares, bottom=bottoms, label=lab.tag)
        bottoms = [b + s for b, s in zip(bottoms, shares)]
    ax.set_ylabel("share (%)")
    ax.set_ylim(0, 100)
    ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def emit_report(records: Sequence[PredictionRecord], out_dir) -> dict[str, list[str]]:
    """Write the full report bundle for one predictions set.

    Returns the written paths grouped by kind (report, matrices, plots,
    distributions).
    """
    if not records:
        raise ValueError("no prediction records to report on")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    overall = confusion_matrix(records)
    per_language = per_language_matrices(records)
    report = classification_report(overall)
    written: dict[str, list[str]] = {"report": [], "matrices": [], "distributions": [], "plots": []}

    written["report"].append(str(dump_json(out_dir / "report.json", report.to_dict())))

    written["matrices"].append(str(write_confusion_csv(out_dir / "confusion-overall.csv", overall)))
    written["plots"].append(
        str(plot_confusion_heatmap(out_dir / "confusion-overall.svg", overall, "Confusion matrix (overall)"))
    )
    for language, cm in per_language.items():
        written["matrices"].append(
            str(write_confusion_csv(out_dir / f"confusion-{language}.csv", cm))
        )
        written["plots"].append(
            str(
                plot_confusion_heatmap(
                    out_dir / f"confusion-{language}.svg", cm, f"Confusion matrix ({language})"
                )
            )
        )

    pairs = [(r.language, r.true_label) for r in records]
    tables = distribution_from_pairs(pairs, by_language=True)
    written["distributions"].append(str(write_distribution_csv(out_dir / "distribution.csv", tables)))
    written["plots"].append(
        str(plot_distribution(out_dir / "distribution-overall.svg", tables[:1], "Label distribution"))
    )
    if len(tables) > 1:
        written["plots"].append(
            str(
                plot_distribution(
                    out_dir / "distribution-by-language.svg", tables[1:], "Label distribution by language"
                )
            )
        )
    return written
