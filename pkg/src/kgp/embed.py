"""Embedding providers and vector similarity helpers.

Two providers ship with the package: a deterministic signed-hashing
bag-of-terms embedder that works offline, and an HTTP client for any
service exposing ``POST {base_url}/embed`` with ``{"texts": [...]}`` ->
``{"vectors": [[...], ...]}``.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
import time
from typing import Mapping, Protocol, Sequence, runtime_checkable

import httpx
import numpy as np

from kgp.errors import DimensionError, InputError, ProviderError
from kgp.text import Ranking, terms

log = logging.getLogger(__name__)

Vector = np.ndarray


@runtime_checkable
class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed_batch(self, texts: Sequence[str]) -> list[Vector]: ...


def _bucket(term: str, dimension: int) -> tuple[int, float]:
    digest = hashlib.blake2b(term.encode("utf-8"), digest_size=8).digest()
    h = int.from_bytes(digest, "little")
    return h % dimension, (1.0 if (h >> 63) & 1 else -1.0)


def hash_embed(text: str, dimension: int = 256) -> Vector:
    """Signed feature hashing of the text's term counts, L2-normalized.

    Returns the zero vector when the text has no terms.
    """
    if dimension < 8:
        raise ValueError("dimension must be >= 8")
    vec = np.zeros(dimension, dtype=np.float64)
    for term in terms(text):
        idx, sign = _bucket(term, dimension)
        vec[idx] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


class HashingProvider:
    def __init__(self, dimension: int = 256):
        if dimension < 8:
            raise ValueError("dimension must be >= 8")
        self.dimension = dimension
        self.name = f"hash-{dimension}"

    def embed_batch(self, texts: Sequence[str]) -> list[Vector]:
        return [hash_embed(t, self.dimension) for t in texts]

    def describe(self) -> dict:
        return {"provider": "hash", "dimension": self.dimension}


class RemoteProvider:
    """Client for a remote embedding endpoint.

    ``base_url``/``api_key`` default to ``KGP_EMBED_URL``/``KGP_EMBED_KEY``.
    Server errors (5xx) and transport failures are retried with linear
    backoff; other HTTP errors fail immediately.
    """

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        *,
        dimension: int | None = None,
        batch_size: int = 64,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ):
        base_url = base_url or os.environ.get("KGP_EMBED_URL")
        if not base_url:
            raise ProviderError("no embedding endpoint configured", attempts=0)
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key or os.environ.get("KGP_EMBED_KEY")
        self.dimension = dimension or 0
        self.batch_size = batch_size
        self.retries = retries
        self.backoff = backoff
        self.name = f"remote:{self.base_url}"
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def describe(self) -> dict:
        return {"provider": "remote", "base_url": self.base_url, "dimension": self.dimension}

    def _post(self, texts: Sequence[str]) -> list[Vector]:
        status = None
        for attempt in range(1, self.retries + 1):
            try:
                resp = self._client.post(f"{self.base_url}/embed", json={"texts": list(texts)})
            except httpx.TransportError as exc:
                log.warning("embedding request failed (attempt %d): %s", attempt, exc)
            else:
                status = resp.status_code
                if resp.status_code < 400:
                    vectors = resp.json().get("vectors")
                    if not isinstance(vectors, list) or len(vectors) != len(texts):
                        raise ProviderError("malformed embedding response", attempt, status)
                    return [np.asarray(v, dtype=np.float64) for v in vectors]
                if resp.status_code < 500:
                    raise ProviderError(f"embedding endpoint rejected request: {resp.text[:200]}", attempt, status)
            if attempt < self.retries:
                time.sleep(self.backoff * attempt)
        raise ProviderError("embedding endpoint unavailable", self.retries, status)

    def embed_batch(self, texts: Sequence[str]) -> list[Vector]:
        out: list[Vector] = []
        for start in range(0, len(texts), self.batch_size):
            out.extend(self._post(texts[start : start + self.batch_size]))
        dims = {len(v) for v in out}
        if len(dims) > 1 or (self.dimension and dims and dims != {self.dimension}):
            raise DimensionError(f"remote provider returned dimensions {sorted(dims)}")
        if out and not self.dimension:
            self.dimension = len(out[0])
        return out


def provider_from_meta(meta: Mapping) -> EmbeddingProvider:
    """Rebuild a provider from the description stored in graph metadata."""
    kind = meta.get("provider", "hash")
    if kind == "hash":
        return HashingProvider(int(meta.get("dimension", 256)))
    if kind == "remote":
        return RemoteProvider(meta.get("base_url"), dimension=meta.get("dimension"))
    raise ValueError(f"unknown embedding provider {kind!r}")


def embed(provider: EmbeddingProvider, texts: Sequence[str]) -> list[Vector]:
    if not texts:
        return []
    for i, t in enumerate(texts):
        if not isinstance(t, str) or not t.strip():
            raise InputError(f"text {i} is empty")
    return provider.embed_batch(list(texts))


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity; 0.0 if either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = math.sqrt(float(a @ a))
    nb = math.sqrt(float(b @ b))
    if na == 0 or nb == 0:
        return 0.0
    return max(-1.0, min(1.0, float(a @ b) / (na * nb)))


# Similarities are rounded before ranking so that mathematically equal
# scores computed along different float paths still tie.
SIM_DECIMALS = 12


def similarity_matrix(ids: Sequence[str], embeddings: Mapping[str, Sequence[float]]) -> np.ndarray:
    mat = np.asarray([embeddings[i] for i in ids], dtype=np.float64)
    if mat.ndim != 2:
        raise DimensionError("embeddings must share one dimension")
    norms = np.linalg.norm(mat, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = mat / safe[:, None]
    sims = np.clip(unit @ unit.T, -1.0, 1.0)
    sims[norms == 0, :] = 0.0
    sims[:, norms == 0] = 0.0
    return np.round(sims, SIM_DECIMALS)


def knn(query_id: str, embeddings: Mapping[str, Sequence[float]], k: int) -> Ranking:
    """Top-``k`` (id, cosine) pairs for ``query_id``, ties by ascending id.

    Asking for ``k >= len(embeddings)`` returns every other id, flagged
    ``truncated``.
    """
    if query_id not in embeddings:
        raise KeyError(query_id)
    q = embeddings[query_id]
    scored = [
        (i, round(cosine(q, v), SIM_DECIMALS)) for i, v in embeddings.items() if i != query_id
    ]
    scored.sort(key=lambda p: (-p[1], p[0]))
    return Ranking(scored[: max(k, 0)], truncated=k >= len(embeddings))
