"""Tokenization, stopwords and a small in-memory term index.

Two notions of "token" coexist here:

* passage tokens are maximal whitespace-separated units (used for
  splitting and length budgets);
* terms are lowercased alphanumeric runs (used for keyword extraction,
  TF-IDF/BM25 scoring and hashing embeddings).
"""

from __future__ import annotations

import math
import re
from collections import Counter
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

_TERM_RE = re.compile(r"[^\W_]+", re.UNICODE)


def whitespace_tokens(text: str) -> list[str]:
    return text.split()


def terms(text: str) -> list[str]:
    """Lowercased alphanumeric runs, in order, with repetition."""
    return _TERM_RE.findall(text.lower())


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    data = resources.files("kgp").joinpath("stopwords.txt").read_text(encoding="utf-8")
    return frozenset(data.split())


def load_stopwords(path: str | Path | None) -> frozenset[str]:
    """Stopword set from a whitespace-separated file, or the built-in list."""
    if path is None:
        return default_stopwords()
    return frozenset(w.lower() for w in Path(path).read_text(encoding="utf-8").split())


def content_terms(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    stop = default_stopwords() if stopwords is None else stopwords
    return [t for t in terms(text) if t not in stop]


class TermIndex:
    """Term frequencies and document frequencies over a fixed text collection.

    Keys are treated as opaque ids; iteration order is ascending id so that
    every ranking built on top of the index is deterministic.
    """

    def __init__(self, texts: Mapping[str, str]):
        self.ids: list[str] = sorted(texts)
        self.tf: dict[str, Counter[str]] = {i: Counter(terms(texts[i])) for i in self.ids}
        self.length: dict[str, int] = {i: sum(c.values()) for i, c in self.tf.items()}
        self.df: Counter[str] = Counter()
        for counts in self.tf.values():
            self.df.update(counts.keys())
        self.n = len(self.ids)

    def idf(self, term: str) -> float:
        df = self.df.get(term, 0)
        if df == 0:
            return 0.0
        return math.log(self.n / df)

    def tfidf(self, term: str, doc_id: str) -> float:
        return self.tf[doc_id].get(term, 0) * self.idf(term)

    def query_terms(self, query: str, stopwords: frozenset[str] | None = None) -> list[str]:
        """Distinct non-stopword query terms in first-occurrence order."""
        return list(dict.fromkeys(content_terms(query, stopwords)))

    def tfidf_scores(self, query: str, stopwords: frozenset[str] | None = None) -> dict[str, float]:
        qterms = self.query_terms(query, stopwords)
        return {i: sum(self.tfidf(t, i) for t in qterms) for i in self.ids}


class Ranking(list):
    """A ranked list carrying flags about how it was produced.

    ``truncated`` marks a request for more items than exist; ``fallback``
    marks a ranking where every score was zero and the order is purely
    lexicographic.
    """

    def __init__(self, items: Iterable = (), *, truncated: bool = False, fallback: bool = False):
        super().__init__(items)
        self.truncated = truncated
        self.fallback = fallback


def top_n_by_score(scores: Mapping[str, float], n: int) -> Ranking:
    """Top ``n`` ids by descending score, ties by ascending id.

    When every score is zero the ranking falls back to lexicographic order
    and is flagged.
    """
    ordered = sorted(scores, key=lambda i: (-scores[i], i))
    fallback = bool(scores) and all(s == 0 for s in scores.values())
    return Ranking(ordered[:n], truncated=n > len(ordered), fallback=fallback)
