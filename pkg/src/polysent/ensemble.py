"""Majority voting over member classifiers.

Each member casts its argmax label; a strict plurality wins outright. Ties
among the top vote-getters resolve either by summed member probabilities
over the tied labels (``sum_scores``, the default: uses the confidence the
members already produced) or by the smallest tied ordinal
(``lowest_ordinal``, for strict reproducibility comparisons). Both modes are
invariant to member order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .corpus import LabeledSample, SentimentLabel
from .models import (
    ClassScores,
    ModelConfig,
    ModelHandle,
    PredictionRecord,
    predict_dataset,
    predicted_label,
)

TIE_BREAKS = ("sum_scores", "lowest_ordinal")


class EnsembleMemberError(RuntimeError):
    """A member failed during inference; the whole batch is rejected."""


@dataclass(frozen=True)
class EnsembleConfig:
    members: tuple[ModelConfig, ...]
    tie_break: str = "sum_scores"

    def __post_init__(self) -> None:
        if len(self.members) < 2:
            raise ValueError("ensemble needs >= 2 members")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"tie_break must be one of {TIE_BREAKS}: {self.tie_break!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleConfig":
        members = tuple(ModelConfig.from_dict(m) for m in d.get("members", ()))
        return cls(members=members, tie_break=d.get("tie_break", "sum_scores"))


def vote(member_scores: Sequence[ClassScores], tie_break: str = "sum_scores") -> SentimentLabel:
    """Resolve one sample's label from the members' score vectors."""
    if len(member_scores) < 2:
        raise ValueError("vote needs >= 2 member score vectors")
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"tie_break must be one of {TIE_BREAKS}: {tie_break!r}")

    tally = Counter(predicted_label(scores) for scores in member_scores)
    top = max(tally.values())
    tied = sorted(label for label, n in tally.items() if n == top)
    if len(tied) == 1 or tie_break == "lowest_ordinal":
        return tied[0]

    sums = {label: sum(s.probs[label] for s in member_scores) for label in tied}
    winner = tied[0]
    for label in tied[1:]:
        if sums[label] > sums[winner]:
            winner = label
    return winner


def ensemble_predict(
    members: Sequence[ModelHandle],
    samples: Sequence[LabeledSample],
    cfg: EnsembleConfig,
    batch_size: int = 32,
) -> list[PredictionRecord]:
    """Vote member predictions per sample.

    The record's ``scores`` is the renormalized mean of the member vectors,
    kept for audit; ``predicted`` is the vote outcome (which may differ from
    the mean's argmax), and ``member_votes`` preserves each member's call.
    """
    if len(members) != len(cfg.members):
        raise ValueError(
            f"{len(members)} handles for {len(cfg.members)} configured members"
        )
    samples = list(samples)

    per_member: list[list[PredictionRecord]] = []
    for index, handle in enumerate(members):
        try:
            per_member.append(predict_dataset(handle, samples, batch_size=batch_size))
        except Exception as exc:
            raise EnsembleMemberError(
                f"member {index} ({handle.config.checkpoint_id!r}) failed: {exc}"
            ) from exc

    records: list[PredictionRecord] = []
    for position, sample in enumerate(samples):
        member_scores = [preds[position].scores for preds in per_member]
        mean = tuple(
            sum(scores.probs[c] for scores in member_scores) / len(member_scores)
            for c in range(3)
        )
        records.append(
            PredictionRecord(
                sample_id=sample.id,
                language=sample.language,
                true_label=sample.label,
                scores=ClassScores(mean),
                predicted=vote(member_scores, cfg.tie_break),
                member_votes=tuple(preds[position].predicted for preds in per_member),
            )
        )
    return records
