"""HTTP client for a text-completion endpoint.

``POST {base_url}/generate`` with ``{"prompt": str, "max_tokens": int}``
returning ``{"text": str}``. Configured from ``KGP_LLM_URL`` and
``KGP_LLM_KEY`` unless given explicitly.
"""

from __future__ import annotations

import logging
import os
import time

import httpx

from kgp.errors import ProviderError

log = logging.getLogger(__name__)

CLASSIFY_PROMPT = (
    "Does the following question ask about the structure of a document "
    "(a specific page or table) or about its content? "
    "Reply with exactly one word: structural or content.\n\nQuestion: {question}\nLabel:"
)


class CompletionClient:
    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        *,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        base_url = base_url or os.environ.get("KGP_LLM_URL")
        if not base_url:
            raise ProviderError("no completion endpoint configured", attempts=0)
        self.base_url = base_url.rstrip("/")
        api_key = api_key or os.environ.get("KGP_LLM_KEY")
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self.retries = retries
        self.backoff = backoff
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def generate(self, prompt: str, max_tokens: int = 128) -> str:
        status = None
        for attempt in range(1, self.retries + 1):
            try:
                resp = self._client.post(
                    f"{self.base_url}/generate", json={"prompt": prompt, "max_tokens": max_tokens}
                )
            except httpx.TransportError as exc:
                log.warning("completion request failed (attempt %d): %s", attempt, exc)
            else:
                status = resp.status_code
                if status < 400:
                    text = resp.json().get("text")
                    if not isinstance(text, str):
                        raise ProviderError("malformed completion response", attempt, status)
                    return text
                if status < 500:
                    raise ProviderError(f"completion endpoint rejected request: {resp.text[:200]}", attempt, status)
            if attempt < self.retries:
                time.sleep(self.backoff * attempt)
        raise ProviderError("completion endpoint unavailable", self.retries, status)


class RemoteClassifier:
    def __init__(self, client: CompletionClient):
        self.client = client

    def classify(self, text: str) -> str:
        reply = self.client.generate(CLASSIFY_PROMPT.replace("{question}", text), max_tokens=4)
        word = reply.strip().split()[0].lower().strip(".,:;") if reply.strip() else ""
        return word
