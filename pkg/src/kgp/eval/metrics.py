"""Retrieval and answer metrics."""

from __future__ import annotations

import re
import string
from collections import Counter
from typing import Iterable

from kgp.errors import InputError

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT = str.maketrans("", "", string.punctuation)


def normalize_answer(text: str) -> str:
    """Lowercase, drop punctuation and articles, collapse whitespace."""
    text = text.lower().translate(_PUNCT)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def answer_em(prediction: str, gold: str) -> int:
    return int(normalize_answer(prediction) == normalize_answer(gold))


def answer_f1(prediction: str, gold: str) -> float:
    pred = normalize_answer(prediction).split()
    ref = normalize_answer(gold).split()
    common = Counter(pred) & Counter(ref)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred)
    recall = overlap / len(ref)
    return 2 * precision * recall / (precision + recall)


def sf_em(retrieved: Iterable[str], gold: Iterable[str]) -> int:
    """1 when every supporting fact was retrieved."""
    gold = set(gold)
    if not gold:
        raise InputError("gold supporting facts are empty")
    return int(gold <= set(retrieved))


def sf_coverage(retrieved: Iterable[str], gold: Iterable[str]) -> float:
    """Fraction of supporting facts retrieved."""
    gold = set(gold)
    if not gold:
        raise InputError("gold supporting facts are empty")
    return len(gold & set(retrieved)) / len(gold)


def retrieval_precision(retrieved: Iterable[str], gold: Iterable[str]) -> float:
    retrieved = set(retrieved)
    if not retrieved:
        raise InputError("nothing was retrieved")
    return len(retrieved & set(gold)) / len(retrieved)


def _normalize_content(text: str) -> str:
    return " ".join(text.lower().split())


def struct_em(payloads: Iterable[str], gold: str) -> int:
    """1 when the gold structure content matches a payload.

    The concatenation of all payloads is also accepted, since a page's
    content arrives as one payload per passage.
    """
    payloads = list(payloads)
    target = _normalize_content(gold)
    if not target:
        raise InputError("gold structure content is empty")
    if any(_normalize_content(p) == target for p in payloads):
        return 1
    return int(_normalize_content(" ".join(payloads)) == target)


def mean(values: Iterable[float]) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0
