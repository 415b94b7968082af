import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")  # tests must never hit the network

import hashlib
import random
from pathlib import Path

import pytest

from polysent import LabeledSample, ModelConfig, SentimentLabel, load_model

FIXTURES_DIR = Path(__file__).parent / "fixtures"

# Tokens for synthetic separable corpora: one dedicated marker per class plus
# neutral fillers. Marker/filler hash ids are distinct under the toy
# tokenizer (checked in test_models).
CLASS_TOKENS = ("negsig", "neusig", "possig")
FILLER_TOKENS = ("rio", "mar", "sol", "luz", "ven", "tag", "rem", "ost", "nul", "par", "kim", "dor")
_STARS_FOR = {0: 1, 1: 3, 2: 5}


def make_separable_corpus(n: int, seed: int = 13, id_prefix: str = "syn") -> list[LabeledSample]:
    """Synthetic corpus where each class is marked by its own repeated token."""
    rng = random.Random(seed)
    samples = []
    for i in range(n):
        ordinal = i % 3
        words = [CLASS_TOKENS[ordinal]] * 2 + rng.sample(FILLER_TOKENS, 4)
        rng.shuffle(words)
        samples.append(
            LabeledSample(
                id=f"{id_prefix}:{i}",
                text_clean=" ".join(words),
                language="es",
                label=SentimentLabel(ordinal),
                stars=_STARS_FOR[ordinal],
            )
        )
    return samples


def weights_digest(model) -> str:
    """Stable fingerprint of all model parameters and buffers."""
    digest = hashlib.sha256()
    state = model.state_dict()
    for name in sorted(state):
        digest.update(name.encode())
        digest.update(state[name].detach().cpu().numpy().tobytes())
    return digest.hexdigest()


@pytest.fixture(scope="session")
def demo_csv() -> Path:
    return FIXTURES_DIR / "tweets_demo.csv"


@pytest.fixture()
def toy_handle():
    return load_model(ModelConfig(checkpoint_id="toy:7", max_seq_len=64))


@pytest.fixture(scope="session")
def fitted_toy():
    """Toy handle fine-tuned to 100% train accuracy on the separable corpus."""
    from polysent import DatasetSplit, TrainConfig, train

    corpus = make_separable_corpus(220, seed=13)
    split = DatasetSplit(tuple(corpus[:200]), tuple(corpus[200:]), ())
    handle = load_model(ModelConfig(checkpoint_id="toy:0", max_seq_len=32))
    train(handle, split, TrainConfig(epochs=3, learning_rate=3e-3, batch_size=8, seed=0))
    return handle
