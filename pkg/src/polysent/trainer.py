"""Fine-tuning loop: AdamW with a linear learning-rate schedule, validation
metrics after every epoch, best checkpoint kept by macro-F1.

A run directory, when given, collects ``config.json``, ``metrics.jsonl``
(one line per epoch), ``checkpoint-best/`` and ``checkpoint-last/``.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import torch
import torch.nn.functional as F

from .corpus import LabeledSample
from .metrics import classification_report, confusion_matrix
from .models import ModelHandle, encode_batch, predict_dataset, save_model
from .splitter import DatasetSplit


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; training aborts instead of writing garbage."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 3
    learning_rate: float = 2e-5
    batch_size: int = 32
    weight_decay: float = 0.01
    warmup_fraction: float = 0.0
    seed: int = 42
    determinism: bool = True
    max_grad_norm: float = 1.0

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ValueError("warmup_fraction must be in [0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    mean_train_loss: float

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "EpochMetrics":
        return cls(**{name: d[name] for name in cls.__dataclass_fields__})


def linear_lr_factor(step: int, total_steps: int, warmup_steps: int = 0) -> float:
    """Multiplier on the peak learning rate at optimizer step ``step``.

    Ramps linearly over the warmup steps, then decays linearly to zero at
    ``total_steps``.
    """
    if warmup_steps > 0 and step < warmup_steps:
        return step / warmup_steps
    if total_steps <= warmup_steps:
        return 0.0
    return max(0.0, (total_steps - step) / (total_steps - warmup_steps))


def evaluate_epoch(
    handle: ModelHandle,
    dataset: Sequence[LabeledSample],
    *,
    epoch: int = 0,
    mean_train_loss: float = 0.0,
    batch_size: int = 32,
) -> EpochMetrics:
    """Score a labeled dataset without touching weights."""
    dataset = list(dataset)
    if not dataset:
        raise ValueError("cannot evaluate an empty dataset")
    records = predict_dataset(handle, dataset, batch_size=batch_size)
    report = classification_report(confusion_matrix(records))
    return EpochMetrics(
        epoch=epoch,
        accuracy=report.accuracy,
        macro_precision=report.macro_precision,
        macro_recall=report.macro_recall,
        macro_f1=report.macro_f1,
        mean_train_loss=mean_train_loss,
    )


def _write_run_config(run_dir: Path, handle: ModelHandle, cfg: TrainConfig) -> None:
    payload = {"model": handle.config.to_dict(), "train": cfg.to_dict()}
    (run_dir / "config.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8"
    )


def train(
    handle: ModelHandle,
    split: DatasetSplit,
    cfg: TrainConfig,
    run_dir=None,
) -> tuple[ModelHandle, list[EpochMetrics]]:
    """Fine-tune on ``split.train``, validating on ``split.val`` every epoch.

    Returns the handle after the final epoch plus one metrics entry per
    epoch. The best epoch by validation macro-F1 is persisted to
    ``<run_dir>/checkpoint-best`` when a run directory is given; the final
    state goes to ``checkpoint-last``.
    """
    if cfg.epochs == 0:
        return handle, []
    train_set = list(split.train)
    if not train_set:
        raise ValueError("empty train split")
    if not split.val:
        raise ValueError("empty validation split")

    if run_dir is not None:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        _write_run_config(run_dir, handle, cfg)
        metrics_path = run_dir / "metrics.jsonl"
        metrics_path.write_text("", "utf-8")

    torch.manual_seed(cfg.seed)
    was_deterministic = torch.are_deterministic_algorithms_enabled()
    if cfg.determinism:
        torch.use_deterministic_algorithms(True, warn_only=True)

    model = handle.model
    device = handle.device
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.weight_decay
    )
    steps_per_epoch = math.ceil(len(train_set) / cfg.batch_size)
    total_steps = steps_per_epoch * cfg.epochs
    warmup_steps = int(round(cfg.warmup_fraction * total_steps))
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: linear_lr_factor(step, total_steps, warmup_steps)
    )

    history: list[EpochMetrics] = []
    best_f1 = -1.0
    try:
        for epoch in range(1, cfg.epochs + 1):
            order = list(range(len(train_set)))
            random.Random(cfg.seed * 1_000_003 + epoch).shuffle(order)
            model.train()
            loss_sum = 0.0
            for step_start in range(0, len(order), cfg.batch_size):
                chunk = [train_set[i] for i in order[step_start : step_start + cfg.batch_size]]
                batch = encode_batch(handle, [s.text_clean for s in chunk])
                labels = torch.tensor([int(s.label) for s in chunk], device=device)
                logits = model(
                    input_ids=batch.token_ids.to(device),
                    attention_mask=batch.attention_mask.to(device),
                ).logits
                loss = F.cross_entropy(logits, labels)
                value = loss.item()
                if not math.isfinite(value):
                    raise TrainingDivergedError(
                        f"non-finite loss {value} at epoch {epoch}, "
                        f"step {step_start // cfg.batch_size}"
                    )
                optimizer.zero_grad()
                loss.backward()
                torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.max_grad_norm)
                optimizer.step()
                scheduler.step()
                loss_sum += value * len(chunk)

            entry = evaluate_epoch(
                handle,
                split.val,
                epoch=epoch,
                mean_train_loss=loss_sum / len(train_set),
                batch_size=cfg.batch_size,
            )
            history.append(entry)
            if run_dir is not None:
                with metrics_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry.to_dict(), sort_keys=True) + "\n")
                if entry.macro_f1 > best_f1:
                    best_f1 = entry.macro_f1
                    save_model(handle, run_dir / "checkpoint-best")
        if run_dir is not None:
            save_model(handle, run_dir / "checkpoint-last")
    finally:
        if cfg.determinism:
            torch.use_deterministic_algorithms(was_deterministic, warn_only=True)
        model.eval()
    return handle, history
