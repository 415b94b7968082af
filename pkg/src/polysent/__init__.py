"""Multilingual tweet sentiment pipeline.

Ingest star-rated multilingual tweets, normalize the text, collapse ratings
to three polarity classes, split with joint (language x label)
stratification, fine-tune encoder classifiers, combine them by majority
voting, and evaluate with macro metrics and per-language confusion matrices.
"""

from .corpus import (
    CorpusError,
    DistributionTable,
    LabeledSample,
    RejectedRow,
    Sample,
    SentimentLabel,
    distribution,
    label_samples,
    load_corpus,
    map_stars_to_label,
    parse_star_rating,
)
from .ensemble import EnsembleConfig, ensemble_predict, vote
from .metrics import (
    ClassReport,
    ConfusionMatrix,
    classification_report,
    confusion_matrix,
    per_language_matrices,
)
from .models import (
    ClassScores,
    EncodedBatch,
    ModelConfig,
    ModelHandle,
    PredictionRecord,
    encode_batch,
    load_model,
    predict_batch,
    predict_dataset,
    predicted_label,
    save_model,
)
from .preprocess import normalize_text, preprocess_corpus
from .splitter import DatasetSplit, SplitSpec, stratified_split, stratum_allocation
from .trainer import EpochMetrics, TrainConfig, evaluate_epoch, train

__version__ = "0.1.0"

__all__ = [
    "ClassReport",
    "ClassScores",
    "ConfusionMatrix",
    "CorpusError",
    "DatasetSplit",
    "DistributionTable",
    "EncodedBatch",
    "EnsembleConfig",
    "EpochMetrics",
    "LabeledSample",
    "ModelConfig",
    "ModelHandle",
    "PredictionRecord",
    "RejectedRow",
    "Sample",
    "SentimentLabel",
    "SplitSpec",
    "TrainConfig",
    "classification_report",
    "confusion_matrix",
    "distribution",
    "encode_batch",
    "ensemble_predict",
    "evaluate_epoch",
    "label_samples",
    "load_corpus",
    "load_model",
    "map_stars_to_label",
    "normalize_text",
    "parse_star_rating",
    "per_language_matrices",
    "predict_batch",
    "predict_dataset",
    "predicted_label",
    "preprocess_corpus",
    "save_model",
    "stratified_split",
    "stratum_allocation",
    "train",
    "vote",
]
