"""Star-rated multilingual tweet ingestion and 3-class label mapping.

Input tables carry one row per tweet: raw text, a two-letter language tag,
and a 1..5 star rating (``"3 stars"``-style strings, or bare integers).
Ratings collapse onto three polarity classes: 1-2 negative, 3 neutral,
4-5 positive. Bad rows are collected into a rejects report instead of
aborting the load; social-media dumps are dirty and one malformed row
must not kill a run.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, replace
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Iterator


class CorpusError(ValueError):
    """The input table is unusable: missing file, missing column, or no rows."""


class SentimentLabel(IntEnum):
    """Three-class polarity; the ordinals index matrices and score vectors."""

    NEGATIVE = 0
    NEUTRAL = 1
    POSITIVE = 2

    @property
    def tag(self) -> str:
        return self.name.lower()

    @classmethod
    def from_tag(cls, tag: str) -> "SentimentLabel":
        try:
            return cls[str(tag).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown sentiment label {tag!r}") from None


LABELS: tuple[SentimentLabel, ...] = tuple(SentimentLabel)

# Reserved tag for rows whose language field is absent or malformed; keeps
# per-language reporting total instead of silently dropping samples.
UND_LANGUAGE = "und"

_LANGUAGE_RE = re.compile(r"^[a-z]{2}$")
_STAR_RE = re.compile(r"^\s*(\d+)\s*(?:stars?)?\s*$", re.IGNORECASE)

REQUIRED_COLUMNS = ("tweet", "language", "sentiment")


@dataclass(frozen=True)
class Sample:
    """One raw tweet row."""

    id: str
    text: str
    language: str
    stars: int


@dataclass(frozen=True)
class LabeledSample:
    """A sample with its collapsed 3-class label.

    ``text_clean`` holds the raw text until the preprocessing stage rewrites
    it; normalization is idempotent, so cleaning an already-clean sample is
    harmless. ``stars`` keeps the original rating for audit.
    """

    id: str
    text_clean: str
    language: str
    label: SentimentLabel
    stars: int

    def with_text(self, text: str) -> "LabeledSample":
        return replace(self, text_clean=text)


@dataclass(frozen=True)
class RejectedRow:
    row: int
    reason: str


@dataclass(frozen=True)
class DistributionTable:
    """Label counts and shares for one scope ("overall" or a language tag)."""

    scope: str
    counts: tuple[int, int, int]
    percentages: tuple[float, float, float]

    @property
    def population(self) -> int:
        return sum(self.counts)

    def to_dict(self) -> dict:
        out: dict = {"scope": self.scope}
        for lab in LABELS:
            out[f"{lab.tag}_count"] = self.counts[lab]
            out[f"{lab.tag}_pct"] = self.percentages[lab]
        return out


def parse_star_rating(raw) -> int:
    """Parse a star rating: ``"N star"``, ``"N stars"``, or a bare integer."""
    if isinstance(raw, bool):
        raise ValueError(f"unparseable star rating {raw!r}")
    if isinstance(raw, int):
        n = raw
    elif isinstance(raw, float) and raw.is_integer():
        n = int(raw)
    else:
        m = _STAR_RE.match(str(raw))
        if m is None:
            raise ValueError(f"unparseable star rating {raw!r}")
        n = int(m.group(1))
    if not 1 <= n <= 5:
        raise ValueError(f"star rating out of range 1..5: {n}")
    return n


def map_stars_to_label(stars: int) -> SentimentLabel:
    """Collapse a 1..5 rating onto the three polarity classes."""
    if stars in (1, 2):
        return SentimentLabel.NEGATIVE
    if stars == 3:
        return SentimentLabel.NEUTRAL
    if stars in (4, 5):
        return SentimentLabel.POSITIVE
    raise ValueError(f"star rating out of range 1..5: {stars}")


def normalize_language(tag) -> str:
    """Lowercase a two-letter tag; anything else maps to ``"und"``."""
    if tag is None:
        return UND_LANGUAGE
    tag = str(tag).strip().lower()
    return tag if _LANGUAGE_RE.match(tag) else UND_LANGUAGE


def _sample_from_fields(stem: str, row_index: int, fields: dict) -> Sample:
    text = fields.get("tweet")
    if text is None:
        raise ValueError("missing field 'tweet'")
    text = str(text)
    if not text.strip():
        raise ValueError("empty text")
    sentiment = fields.get("sentiment")
    if sentiment is None:
        raise ValueError("missing field 'sentiment'")
    stars = parse_star_rating(sentiment)
    language = normalize_language(fields.get("language"))
    return Sample(id=f"{stem}:{row_index}", text=text, language=language, stars=stars)


def _iter_csv_rows(path: Path) -> Iterator[tuple[int, dict | None, str | None]]:
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise CorpusError(f"missing column '{column}'")
        for index, row in enumerate(reader):
            yield index, {k: row.get(k) for k in REQUIRED_COLUMNS}, None


def _iter_jsonl_rows(path: Path) -> Iterator[tuple[int, dict | None, str | None]]:
    with path.open(encoding="utf-8") as fh:
        index = -1
        for line in fh:
            if not line.strip():
                continue
            index += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                yield index, None, f"invalid JSON: {exc.msg}"
                continue
            if not isinstance(obj, dict):
                yield index, None, "row is not an object"
                continue
            yield index, obj, None


def load_corpus(path, fmt: str = "csv") -> tuple[list[Sample], list[RejectedRow]]:
    """Load the raw tweet table, reporting malformed rows instead of failing.

    Sample ids are ``<file-stem>:<row-index>`` so repeated loads of the same
    file produce identical ids. Raises :class:`CorpusError` if the file is
    missing, a CSV column is absent, the file has no rows, or every row is
    rejected.
    """
    path = Path(path)
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown corpus format {fmt!r}")
    if not path.exists():
        raise CorpusError(f"no such file: {path}")
    rows = _iter_csv_rows(path) if fmt == "csv" else _iter_jsonl_rows(path)

    samples: list[Sample] = []
    rejects: list[RejectedRow] = []
    total = 0
    for index, fields, reason in rows:
        total += 1
        if reason is not None:
            rejects.append(RejectedRow(index, reason))
            continue
        try:
            samples.append(_sample_from_fields(path.stem, index, fields))
        except ValueError as exc:
            rejects.append(RejectedRow(index, str(exc)))
    if total == 0:
        raise CorpusError("no rows")
    if not samples:
        raise CorpusError(f"all {total} rows rejected")
    return samples, rejects


def label_samples(samples: Iterable[Sample]) -> list[LabeledSample]:
    """Attach the collapsed label to each sample; text stays raw until cleaning."""
    return [
        LabeledSample(
            id=s.id,
            text_clean=s.text,
            language=s.language,
            label=map_stars_to_label(s.stars),
            stars=s.stars,
        )
        for s in samples
    ]


def _table(scope: str, labels_in_scope: list[SentimentLabel]) -> DistributionTable:
    tally = Counter(labels_in_scope)
    counts = tuple(tally.get(lab, 0) for lab in LABELS)
    population = sum(counts)
    return DistributionTable(scope, counts, tuple(n / population for n in counts))


def distribution_from_pairs(
    pairs: Iterable[tuple[str, SentimentLabel]], by_language: bool = False
) -> list[DistributionTable]:
    """Label distribution over (language, label) pairs; overall table first."""
    pairs = list(pairs)
    if not pairs:
        raise CorpusError("empty corpus")
    tables = [_table("overall", [lab for _, lab in pairs])]
    if by_language:
        per_lang: dict[str, list[SentimentLabel]] = {}
        for lang, lab in pairs:
            per_lang.setdefault(lang, []).append(lab)
        tables.extend(_table(lang, labs) for lang, labs in sorted(per_lang.items()))
    return tables


def distribution(
    corpus: Iterable[LabeledSample], by_language: bool = False
) -> list[DistributionTable]:
    return distribution_from_pairs(((s.language, s.label) for s in corpus), by_language)


# ---------------------------------------------------------------------------
# JSONL persistence for labeled samples (the on-disk pipeline interchange)
# ---------------------------------------------------------------------------

def labeled_to_dict(sample: LabeledSample) -> dict:
    return {
        "id": sample.id,
        "text": sample.text_clean,
        "language": sample.language,
        "stars": sample.stars,
        "label": sample.label.tag,
    }


def labeled_from_dict(row: dict) -> LabeledSample:
    return LabeledSample(
        id=str(row["id"]),
        text_clean=str(row["text"]),
        language=str(row["language"]),
        label=SentimentLabel.from_tag(row["label"]),
        stars=int(row["stars"]),
    )


def write_labeled_jsonl(path, samples: Iterable[LabeledSample]) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(labeled_to_dict(sample), ensure_ascii=False) + "\n")
            count += 1
    return count


def iter_labeled_jsonl(path) -> Iterator[LabeledSample]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield labeled_from_dict(json.loads(line))


def read_labeled_jsonl(path) -> list[LabeledSample]:
    return list(iter_labeled_jsonl(path))
