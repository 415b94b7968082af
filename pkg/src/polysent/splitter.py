"""Deterministic train/validation/test partition, stratified jointly over
(language, label).

Each stratum is apportioned with the largest-remainder method, so every
subgroup's share of each split deviates from its exact quota by less than
one sample. Stratum shuffles are seeded from (seed, language, label), which
keeps existing strata stable when new languages are added to a corpus.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .corpus import LabeledSample, SentimentLabel

SPLIT_NAMES = ("train", "val", "test")


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 42

    def __post_init__(self) -> None:
        if len(self.ratios) != 3:
            raise ValueError("ratios must have exactly three entries")
        if any(r < 0 for r in self.ratios):
            raise ValueError(f"ratios must be nonnegative: {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1.0: {self.ratios}")


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[LabeledSample, ...]
    val: tuple[LabeledSample, ...]
    test: tuple[LabeledSample, ...]

    def __len__(self) -> int:
        return len(self.train) + len(self.val) + len(self.test)


def stratum_allocation(n: int, ratios: Sequence[float]) -> tuple[int, int, int]:
    """Largest-remainder apportionment of ``n`` samples over three splits.

    Quotas ``n * ratio`` are floored, then leftover seats go to the largest
    fractional remainders; remainder ties favor the earlier split (train
    before val before test). Quotas are compared as exact fractions so the
    outcome never depends on float rounding.
    """
    if n < 0:
        raise ValueError("stratum size must be nonnegative")
    quotas = [Fraction(r) * n for r in ratios]
    floors = [int(q) for q in quotas]
    leftover = n - sum(floors)
    by_remainder = sorted(range(3), key=lambda i: (floors[i] - quotas[i], i))
    allocation = floors[:]
    for i in by_remainder[:leftover]:
        allocation[i] += 1
    return tuple(allocation)


def _stratum_rng(seed: int, language: str, label: SentimentLabel) -> random.Random:
    key = f"{seed}|{language}|{int(label)}".encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def stratified_split(corpus: Iterable[LabeledSample], spec: SplitSpec) -> DatasetSplit:
    """Partition the corpus; same corpus and seed always give the same split.

    Stratum members are ordered by id before the seeded shuffle, so the
    result is also invariant to the input ordering of the corpus.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("empty corpus")

    strata: dict[tuple[str, SentimentLabel], list[LabeledSample]] = {}
    for sample in corpus:
        strata.setdefault((sample.language, sample.label), []).append(sample)

    train: list[LabeledSample] = []
    val: list[LabeledSample] = []
    test: list[LabeledSample] = []
    for language, label in sorted(strata, key=lambda k: (k[0], int(k[1]))):
        members = sorted(strata[(language, label)], key=lambda s: s.id)
        _stratum_rng(spec.seed, language, label).shuffle(members)
        n_train, n_val, _ = stratum_allocation(len(members), spec.ratios)
        train.extend(members[:n_train])
        val.extend(members[n_train : n_train + n_val])
        test.extend(members[n_train + n_val :])
    return DatasetSplit(tuple(train), tuple(val), tuple(test))


def stratum_table(split: DatasetSplit) -> dict[str, dict[str, int]]:
    """Per-stratum counts keyed ``"<language>/<label>"``, for the split manifest."""
    table: dict[str, dict[str, int]] = {}
    for name in SPLIT_NAMES:
        for sample in getattr(split, name):
            key = f"{sample.language}/{sample.label.tag}"
            entry = table.setdefault(key, {n: 0 for n in SPLIT_NAMES} | {"total": 0})
            entry[name] += 1
            entry["total"] += 1
    return dict(sorted(table.items()))
