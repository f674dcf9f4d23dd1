"""Non-graph retrievers: TF-IDF, Okapi BM25 and embedding KNN."""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
from rapidfuzz.distance import Levenshtein

from kgp.corpus import Passage
from kgp.embed import SIM_DECIMALS, EmbeddingProvider, cosine, embed
from kgp.text import Ranking, TermIndex, top_n_by_score

PassageTexts = Union[Mapping[str, str], Iterable[Passage]]


def _texts(passages: PassageTexts) -> dict[str, str]:
    if isinstance(passages, Mapping):
        return dict(passages)
    return {p.passage_id: p.text for p in passages}


def tfidf_retrieve(passages: PassageTexts, question: str, top_n: int) -> Ranking:
    index = TermIndex(_texts(passages))
    return top_n_by_score(index.tfidf_scores(question), top_n)


def bm25_scores(index: TermIndex, question: str, k1: float = 1.2, b: float = 0.75) -> dict[str, float]:
    avgdl = sum(index.length.values()) / index.n if index.n else 0.0
    qterms = index.query_terms(question)
    scores: dict[str, float] = {}
    for pid in index.ids:
        tf = index.tf[pid]
        dl = index.length[pid]
        norm = k1 * (1 - b + b * dl / avgdl) if avgdl else k1
        total = 0.0
        for t in qterms:
            f = tf.get(t, 0)
            if f == 0:
                continue
            df = index.df[t]
            idf = math.log((index.n - df + 0.5) / (df + 0.5) + 1)
            total += idf * f * (k1 + 1) / (f + norm)
        scores[pid] = total
    return scores


def bm25_retrieve(
    passages: PassageTexts, question: str, top_n: int, k1: float = 1.2, b: float = 0.75
) -> Ranking:
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    index = TermIndex(_texts(passages))
    return top_n_by_score(bm25_scores(index, question, k1, b), top_n)


def knn_retrieve(
    embeddings: Mapping[str, Sequence[float]],
    question_text: str,
    provider: EmbeddingProvider,
    top_n: int,
    *,
    texts: Mapping[str, str] | None = None,
    lexical_blend: bool = False,
) -> Ranking:
    """Rank passages by cosine to the embedded question.

    With ``lexical_blend`` (requires ``texts``), the first half of the slots
    come from the embedding ranking and the rest from normalized edit
    similarity to the question.
    """
    q = embed(provider, [question_text])[0]
    scored = sorted(
        ((pid, round(cosine(q, np.asarray(v)), SIM_DECIMALS)) for pid, v in embeddings.items()),
        key=lambda p: (-p[1], p[0]),
    )
    ranked = [pid for pid, _ in scored]
    truncated = top_n > len(ranked)
    if not lexical_blend:
        return Ranking(ranked[:top_n], truncated=truncated)
    if texts is None:
        raise ValueError("lexical_blend needs passage texts")
    n_embed = math.ceil(top_n / 2)
    picked = ranked[:n_embed]
    chosen = set(picked)
    lexical = sorted(
        (pid for pid in texts if pid not in chosen),
        key=lambda pid: (-Levenshtein.normalized_similarity(question_text.lower(), texts[pid].lower()), pid),
    )
    picked.extend(lexical[: top_n - len(picked)])
    return Ranking(picked, truncated=truncated)
