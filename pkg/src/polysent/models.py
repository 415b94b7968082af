"""Adapter over pretrained multilingual encoder classifiers.

Everything downstream (training, ensembling, evaluation) talks to a
:class:`ModelHandle`: a sequence-classification model with a 3-class head
plus the tokenizer that feeds it. Checkpoint ids resolve in order:

  * ``toy`` / ``toy:<seed>`` -- a tiny randomly initialized 2-layer encoder
    with a hashing tokenizer; self-contained, so tests and demos never
    download assets;
  * a local directory (either a saved run checkpoint or any HF-format
    checkpoint dir);
  * a hub id, resolved through the cache (override the cache location with
    ``POLYSENT_CACHE_DIR``) and then the remote registry.

Checkpoints whose classification head is not 3-way (e.g. 5-star sentiment
heads) are loaded with a freshly initialized 3-class head and flagged
``head_reinitialized``.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import torch
import transformers
from transformers import (
    AutoConfig,
    AutoModelForSequenceClassification,
    AutoTokenizer,
    BertConfig,
    BertForSequenceClassification,
)

from .corpus import LABELS, LabeledSample, SentimentLabel

transformers.utils.logging.set_verbosity_error()
transformers.utils.logging.disable_progress_bar()

NUM_LABELS = 3
CACHE_DIR_ENV = "POLYSENT_CACHE_DIR"
TOY_SCHEME = "toy"

ID2LABEL = {int(lab): lab.tag for lab in LABELS}
LABEL2ID = {lab.tag: int(lab) for lab in LABELS}


class CheckpointError(ValueError):
    """A checkpoint id could not be resolved to a usable classifier."""


@dataclass(frozen=True)
class ModelConfig:
    checkpoint_id: str
    max_seq_len: int = 128
    num_labels: int = NUM_LABELS
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.num_labels != NUM_LABELS:
            raise ValueError(f"num_labels is fixed at {NUM_LABELS}")
        if self.max_seq_len < 4:
            raise ValueError("max_seq_len must be at least 4")
        if self.device not in ("cpu", "accelerator"):
            raise ValueError(f"device must be 'cpu' or 'accelerator': {self.device!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "checkpoint_id": self.checkpoint_id,
            "max_seq_len": self.max_seq_len,
            "num_labels": self.num_labels,
            "device": self.device,
        }


@dataclass
class EncodedBatch:
    token_ids: torch.Tensor
    attention_mask: torch.Tensor
    sample_ids: list[str]

    def __post_init__(self) -> None:
        if self.token_ids.shape != self.attention_mask.shape:
            raise ValueError("token_ids and attention_mask shapes differ")
        if self.token_ids.shape[0] != len(self.sample_ids):
            raise ValueError("sample_ids length does not match batch size")


@dataclass(frozen=True)
class ClassScores:
    probs: tuple[float, float, float]

    def __post_init__(self) -> None:
        if len(self.probs) != 3:
            raise ValueError("scores must cover exactly three classes")
        if any(p < -1e-9 or p > 1 + 1e-9 for p in self.probs):
            raise ValueError(f"probabilities outside [0, 1]: {self.probs}")
        if abs(sum(self.probs) - 1.0) > 1e-6:
            raise ValueError(f"probabilities must sum to 1: {self.probs}")


@dataclass(frozen=True)
class PredictionRecord:
    """One model's (or an ensemble's) resolved prediction for one sample.

    For single-model records ``predicted`` is the argmax of ``scores``; for
    ensemble records it is the vote outcome while ``scores`` keeps the
    renormalized member mean for audit, alongside each member's own vote.
    """

    sample_id: str
    language: str
    true_label: SentimentLabel | None
    scores: ClassScores
    predicted: SentimentLabel
    member_votes: tuple[SentimentLabel, ...] | None = None


class HashTokenizer:
    """Whitespace tokenizer hashing tokens into a fixed id space.

    Ids come from BLAKE2 (not Python's salted ``hash``), so a saved toy
    checkpoint reloads with identical behavior on any platform.
    """

    PAD_ID, CLS_ID, SEP_ID, UNK_ID = 0, 1, 2, 3
    _NUM_SPECIALS = 4
    FILENAME = "hash_tokenizer.json"

    def __init__(self, vocab_size: int = 512):
        if vocab_size <= self._NUM_SPECIALS:
            raise ValueError("vocab_size must exceed the special-token count")
        self.vocab_size = vocab_size

    def token_id(self, token: str) -> int:
        digest = hashlib.blake2s(token.encode("utf-8"), digest_size=4).digest()
        span = self.vocab_size - self._NUM_SPECIALS
        return self._NUM_SPECIALS + int.from_bytes(digest, "big") % span

    def encode(self, text: str, max_len: int) -> list[int]:
        if max_len < 2:
            raise ValueError("max_len must fit the CLS and SEP tokens")
        body = [self.token_id(tok) for tok in text.split()][: max_len - 2]
        return [self.CLS_ID, *body, self.SEP_ID]

    def save(self, directory) -> None:
        payload = {"kind": "hash", "vocab_size": self.vocab_size}
        (Path(directory) / self.FILENAME).write_text(json.dumps(payload), "utf-8")

    @classmethod
    def load(cls, directory) -> "HashTokenizer":
        payload = json.loads((Path(directory) / cls.FILENAME).read_text("utf-8"))
        return cls(vocab_size=int(payload["vocab_size"]))


@dataclass
class ModelHandle:
    model: torch.nn.Module
    tokenizer: object
    config: ModelConfig
    head_reinitialized: bool = False

    @property
    def device(self) -> torch.device:
        return next(self.model.parameters()).device


def _resolve_device(device: str) -> torch.device:
    if device == "cpu":
        return torch.device("cpu")
    if torch.cuda.is_available():
        return torch.device("cuda")
    raise RuntimeError("device 'accelerator' requested but none is available")


TOY_VOCAB_SIZE = 512
TOY_HIDDEN_SIZE = 64
TOY_LAYERS = 2
TOY_HEADS = 4
TOY_MAX_POSITIONS = 512


def _toy_seed(checkpoint_id: str) -> int:
    if checkpoint_id == TOY_SCHEME:
        return 0
    suffix = checkpoint_id[len(TOY_SCHEME) + 1 :]
    try:
        return int(suffix)
    except ValueError:
        raise CheckpointError(f"bad toy checkpoint id {checkpoint_id!r}") from None


def _build_toy(config: ModelConfig) -> ModelHandle:
    if config.max_seq_len > TOY_MAX_POSITIONS:
        raise ValueError(
            f"max_seq_len {config.max_seq_len} exceeds toy capacity {TOY_MAX_POSITIONS}"
        )
    bert_config = BertConfig(
        vocab_size=TOY_VOCAB_SIZE,
        hidden_size=TOY_HIDDEN_SIZE,
        num_hidden_layers=TOY_LAYERS,
        num_attention_heads=TOY_HEADS,
        intermediate_size=2 * TOY_HIDDEN_SIZE,
        max_position_embeddings=TOY_MAX_POSITIONS,
        hidden_dropout_prob=0.0,
        attention_probs_dropout_prob=0.0,
        pad_token_id=HashTokenizer.PAD_ID,
        num_labels=NUM_LABELS,
        id2label=ID2LABEL,
        label2id=LABEL2ID,
    )
    with torch.random.fork_rng():
        torch.manual_seed(_toy_seed(config.checkpoint_id))
        model = BertForSequenceClassification(bert_config)
    return ModelHandle(model=model, tokenizer=HashTokenizer(TOY_VOCAB_SIZE), config=config)


def _load_pretrained(config: ModelConfig) -> ModelHandle:
    source = config.checkpoint_id
    local = Path(source)
    kwargs: dict = {}
    if not local.is_dir():
        cache_dir = os.environ.get(CACHE_DIR_ENV)
        if cache_dir:
            kwargs["cache_dir"] = cache_dir
    try:
        hf_config = AutoConfig.from_pretrained(source, **kwargs)
    except Exception as exc:
        raise CheckpointError(f"cannot resolve checkpoint {config.checkpoint_id!r}") from exc

    head_reinitialized = hf_config.num_labels != NUM_LABELS
    hf_config.num_labels = NUM_LABELS
    hf_config.id2label = ID2LABEL
    hf_config.label2id = LABEL2ID
    capacity = getattr(hf_config, "max_position_embeddings", None)
    if capacity is not None and config.max_seq_len > capacity:
        raise ValueError(
            f"max_seq_len {config.max_seq_len} exceeds checkpoint capacity {capacity}"
        )
    try:
        model = AutoModelForSequenceClassification.from_pretrained(
            source,
            config=hf_config,
            ignore_mismatched_sizes=head_reinitialized,
            **kwargs,
        )
    except Exception as exc:
        raise CheckpointError(f"cannot load checkpoint {config.checkpoint_id!r}") from exc

    if local.is_dir() and (local / HashTokenizer.FILENAME).exists():
        tokenizer = HashTokenizer.load(local)
    else:
        tokenizer = AutoTokenizer.from_pretrained(source, **kwargs)
    return ModelHandle(
        model=model,
        tokenizer=tokenizer,
        config=config,
        head_reinitialized=head_reinitialized,
    )


def load_model(config: ModelConfig) -> ModelHandle:
    """Resolve a checkpoint id and return a ready 3-class classifier handle."""
    is_toy = config.checkpoint_id == TOY_SCHEME or config.checkpoint_id.startswith(
        TOY_SCHEME + ":"
    )
    handle = _build_toy(config) if is_toy else _load_pretrained(config)
    handle.model.to(_resolve_device(config.device))
    handle.model.eval()
    return handle


def save_model(handle: ModelHandle, directory) -> Path:
    """Persist model and tokenizer so ``load_model(<directory>)`` restores them."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    handle.model.save_pretrained(directory)
    if isinstance(handle.tokenizer, HashTokenizer):
        handle.tokenizer.save(directory)
    else:
        handle.tokenizer.save_pretrained(directory)
    return directory


def encode_batch(
    handle: ModelHandle,
    texts: Sequence[str],
    max_seq_len: int | None = None,
    sample_ids: Sequence[str] | None = None,
) -> EncodedBatch:
    """Tokenize with truncation at ``max_seq_len`` and pad to the batch max."""
    if not texts:
        raise ValueError("cannot encode an empty batch")
    for i, text in enumerate(texts):
        if not text:
            raise ValueError(f"empty text at batch index {i}")
    limit = max_seq_len if max_seq_len is not None else handle.config.max_seq_len

    if isinstance(handle.tokenizer, HashTokenizer):
        rows = [handle.tokenizer.encode(text, limit) for text in texts]
        width = max(len(row) for row in rows)
        token_ids = torch.full((len(rows), width), HashTokenizer.PAD_ID, dtype=torch.long)
        attention_mask = torch.zeros((len(rows), width), dtype=torch.long)
        for i, row in enumerate(rows):
            token_ids[i, : len(row)] = torch.tensor(row, dtype=torch.long)
            attention_mask[i, : len(row)] = 1
    else:
        encoded = handle.tokenizer(
            list(texts),
            padding=True,
            truncation=True,
            max_length=limit,
            return_tensors="pt",
        )
        token_ids = encoded["input_ids"]
        attention_mask = encoded["attention_mask"]

    ids = list(sample_ids) if sample_ids is not None else [str(i) for i in range(len(texts))]
    return EncodedBatch(token_ids=token_ids, attention_mask=attention_mask, sample_ids=ids)


def predict_batch(handle: ModelHandle, batch: EncodedBatch) -> list[ClassScores]:
    """Score one encoded batch; probabilities are softmaxed in float64."""
    device = handle.device
    handle.model.eval()
    with torch.no_grad():
        logits = handle.model(
            input_ids=batch.token_ids.to(device),
            attention_mask=batch.attention_mask.to(device),
        ).logits
    probs = torch.softmax(logits.double(), dim=-1).cpu()
    return [ClassScores(tuple(float(p) for p in row)) for row in probs]


def predicted_label(scores: ClassScores) -> SentimentLabel:
    """Argmax with ties resolved to the lowest ordinal."""
    best = 0
    for i in (1, 2):
        if scores.probs[i] > scores.probs[best]:
            best = i
    return SentimentLabel(best)


def predict_dataset(
    handle: ModelHandle,
    samples: Iterable[LabeledSample],
    batch_size: int = 32,
) -> list[PredictionRecord]:
    """Score samples in batches and resolve each to a PredictionRecord."""
    samples = list(samples)
    records: list[PredictionRecord] = []
    for start in range(0, len(samples), batch_size):
        chunk = samples[start : start + batch_size]
        batch = encode_batch(
            handle,
            [s.text_clean for s in chunk],
            sample_ids=[s.id for s in chunk],
        )
        for sample, scores in zip(chunk, predict_batch(handle, batch)):
            records.append(
                PredictionRecord(
                    sample_id=sample.id,
                    language=sample.language,
                    true_label=sample.label,
                    scores=scores,
                    predicted=predicted_label(scores),
                )
            )
    return records
