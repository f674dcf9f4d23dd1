"""Traversal agents.

An agent supplies three pieces used to pick the next passage:

* ``generate_evidence(question, visited_texts)`` -- what the next passage
  should look like, given the question and the path so far;
* ``map_candidate(feature)`` -- a candidate's text in comparable form;
* ``score(mapped_candidate, evidence)`` -- how well the two agree.

The next node is the highest-scoring candidate. Scoring is delegated to a
matcher: :class:`TextMatcher` compares raw text (identity mapping, text
similarity) and :class:`EncoderMatcher` compares embeddings (inner
product).
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Mapping, Protocol, Sequence

import numpy as np
from rapidfuzz.distance import Levenshtein

from kgp.embed import EmbeddingProvider, embed
from kgp.text import TermIndex, content_terms
from kgp.traverse.remote import CompletionClient

log = logging.getLogger(__name__)

EVIDENCE_INSTRUCTION = "What evidence do we need to answer the question given the current evidence?"


class Agent(Protocol):
    def generate_evidence(self, question: str, visited: Sequence[str]) -> Any: ...

    def map_candidate(self, feature: str) -> Any: ...

    def score(self, candidate: Any, evidence: Any) -> float: ...


@dataclass(frozen=True)
class Evidence:
    text: str
    encoded: Any

    def __str__(self) -> str:
        return self.text


class TextMatcher:
    """Textual similarity between evidence and candidate text.

    ``tfidf`` (default): cosine of smoothed tf-idf vectors, with idf taken
    from ``index`` when given. ``levenshtein``: normalized edit similarity
    of the lowercased strings.
    """

    def __init__(self, index: TermIndex | None = None, method: str = "tfidf"):
        if method not in ("tfidf", "levenshtein"):
            raise ValueError(f"unknown text similarity {method!r}")
        self.method = method
        self.index = index
        self._vec_cache: dict[str, tuple[dict[str, float], float]] = {}

    def _idf(self, term: str) -> float:
        if self.index is None:
            return 1.0
        return math.log((self.index.n + 1) / (self.index.df.get(term, 0) + 1)) + 1.0

    def _vector(self, text: str) -> tuple[dict[str, float], float]:
        hit = self._vec_cache.get(text)
        if hit is None:
            counts = Counter(content_terms(text))
            vec = {t: c * self._idf(t) for t, c in counts.items()}
            hit = (vec, math.sqrt(sum(w * w for w in vec.values())))
            if len(self._vec_cache) < 100_000:
                self._vec_cache[text] = hit
        return hit

    def map(self, feature: str) -> str:
        return feature

    def encode(self, text: str) -> str:
        return text

    def score(self, candidate: str, evidence: str) -> float:
        if self.method == "levenshtein":
            return Levenshtein.normalized_similarity(candidate.lower(), evidence.lower())
        cv, cn = self._vector(candidate)
        ev, en = self._vector(evidence)
        if cn == 0 or en == 0:
            return 0.0
        if len(cv) > len(ev):
            cv, ev = ev, cv
        dot = sum(w * ev.get(t, 0.0) for t, w in cv.items())
        return min(1.0, dot / (cn * en))


class EncoderMatcher:
    """Inner product between embedded evidence and embedded candidates."""

    def __init__(self, provider: EmbeddingProvider):
        self.provider = provider
        self._cache: dict[str, np.ndarray] = {}

    def _embed(self, text: str) -> np.ndarray:
        vec = self._cache.get(text)
        if vec is None:
            vec = embed(self.provider, [text])[0] if text.strip() else np.zeros(self.provider.dimension)
            self._cache[text] = vec
        return vec

    def map(self, feature: str) -> np.ndarray:
        return self._embed(feature)

    def encode(self, text: str) -> np.ndarray:
        return self._embed(text)

    def score(self, candidate: np.ndarray, evidence: np.ndarray) -> float:
        return float(np.dot(candidate, evidence))


class MatchingAgent:
    """Base agent: subclasses propose evidence text, the matcher does the rest."""

    def __init__(self, matcher: TextMatcher | EncoderMatcher):
        self.matcher = matcher

    def propose(self, question: str, visited: Sequence[str]) -> str:
        raise NotImplementedError

    def generate_evidence(self, question: str, visited: Sequence[str]) -> Evidence:
        text = self.propose(question, visited)
        return Evidence(text, self.matcher.encode(text))

    def map_candidate(self, feature: str) -> Any:
        return self.matcher.map(feature)

    def score(self, candidate: Any, evidence: Any) -> float:
        encoded = evidence.encoded if isinstance(evidence, Evidence) else evidence
        return self.matcher.score(candidate, encoded)


class TfIdfAgent(MatchingAgent):
    """Evidence is the question itself: ranks neighbors by question similarity."""

    def propose(self, question: str, visited: Sequence[str]) -> str:
        return question


class OracleAgent(MatchingAgent):
    """Emits the next not-yet-visited gold supporting fact verbatim.

    ``answer_key`` maps question text to its supporting-fact texts in chain
    order. Once every fact is visited (or for unknown questions) the
    question itself is returned.
    """

    def __init__(self, answer_key: Mapping[str, Sequence[str]], matcher: TextMatcher | EncoderMatcher):
        super().__init__(matcher)
        self.answer_key = {q: list(v) for q, v in answer_key.items()}

    def propose(self, question: str, visited: Sequence[str]) -> str:
        gold = self.answer_key.get(question)
        if gold is None:
            log.debug("oracle has no answer key for %r", question)
            return question
        seen = set(visited)
        for fact in gold:
            if fact not in seen:
                return fact
        return question


class RemoteLLMAgent(MatchingAgent):
    """Evidence generated by a completion model prompted with the path so far."""

    def __init__(self, client: CompletionClient, matcher: TextMatcher | EncoderMatcher, max_tokens: int = 128):
        super().__init__(matcher)
        self.client = client
        self.max_tokens = max_tokens

    def build_prompt(self, question: str, visited: Sequence[str]) -> str:
        evidence = "\n".join(visited) if visited else "(none)"
        return f"{EVIDENCE_INSTRUCTION}\n\nQuestion: {question}\nCurrent evidence:\n{evidence}\nNext evidence:"

    def propose(self, question: str, visited: Sequence[str]) -> str:
        return self.client.generate(self.build_prompt(question, visited), self.max_tokens).strip()


class ScaledAgent:
    """Wraps an agent and multiplies its scores by a constant."""

    def __init__(self, inner: Agent, factor: float):
        self.inner = inner
        self.factor = factor

    def generate_evidence(self, question: str, visited: Sequence[str]) -> Any:
        return self.inner.generate_evidence(question, visited)

    def map_candidate(self, feature: str) -> Any:
        return self.inner.map_candidate(feature)

    def score(self, candidate: Any, evidence: Any) -> float:
        return self.factor * self.inner.score(candidate, evidence)
