"""Controlled cleanup of noisy social-media text.

The cleaning pass removes non-semantic content while keeping every script's
letters intact:

  R1  delete URLs (``https?://...`` and ``www....``)
  R2  delete @-mentions
  R3  delete every codepoint that is not a letter (any script), a decimal
      digit, whitespace, or one of the allowed punctuation marks
      (hashtags keep their word and lose the ``#``; emoji are dropped)
  R4  collapse runs of the same punctuation mark to a single one
  R5  collapse whitespace runs to single spaces and trim
  R6  casing is left untouched (encoder tokenizers handle it)

The pass is reapplied until the text stops changing: a deletion can uncover
a pattern an earlier rule should catch (e.g. dropping an emoji inside
``"www<emoji>.x"`` leaves a URL behind), and the fixpoint guarantees the
whole function is idempotent. Each changing pass shrinks the string or
replaces a non-space whitespace character, so the loop terminates.
"""

from __future__ import annotations

import re
import unicodedata
from typing import Iterable

from .corpus import LabeledSample

URL_RE = re.compile(r"https?://\S+|www\.\S+")
MENTION_RE = re.compile(r"@\w+")

ALLOWED_PUNCTUATION = frozenset(".,!?¡¿'\"-:;")

_PUNCT_RUN_RE = re.compile(
    "([" + re.escape("".join(sorted(ALLOWED_PUNCTUATION))) + r"])\1+"
)
_WHITESPACE_RUN_RE = re.compile(r"\s+")


def _keep(ch: str) -> bool:
    if ch in ALLOWED_PUNCTUATION or ch.isspace():
        return True
    category = unicodedata.category(ch)
    return category.startswith("L") or category == "Nd"


def _clean_pass(text: str) -> str:
    text = URL_RE.sub("", text)
    text = MENTION_RE.sub("", text)
    text = "".join(ch for ch in text if _keep(ch))
    text = _PUNCT_RUN_RE.sub(r"\1", text)
    return _WHITESPACE_RUN_RE.sub(" ", text).strip()


def normalize_text(raw: str) -> str:
    """Clean one string; idempotent, never longer than the input."""
    text = raw
    while True:
        cleaned = _clean_pass(text)
        if cleaned == text:
            return text
        text = cleaned


def preprocess_corpus(
    corpus: Iterable[LabeledSample],
) -> tuple[list[LabeledSample], list[str]]:
    """Normalize every sample; samples that clean down to nothing are dropped.

    Returns the kept samples (with ``text_clean`` rewritten) and the ids of
    the dropped ones.
    """
    kept: list[LabeledSample] = []
    dropped: list[str] = []
    for sample in corpus:
        cleaned = normalize_text(sample.text_clean)
        if cleaned:
            kept.append(sample.with_text(cleaned))
        else:
            dropped.append(sample.id)
    return kept, dropped
